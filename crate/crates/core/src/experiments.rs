//! Reproducible studies on the test equation.
//!
//! The figure experiments run one method on one mesh and tabulate the global
//! error next to the fitted envelope. The order and consistency studies
//! sweep a list of step sizes. Default parameters:
//!
//! | kind     | λ    | γ    | h     | method   | interval |
//! |----------|------|------|-------|----------|----------|
//! | Figure1  | −100 | −200 | 5e-3  | explicit | [0, 5]   |
//! | Figure2  | −100 | −200 | 5e-2  | explicit | [0, 2]   |
//! | Figure3  | 1    | 2    | 5e-3  | explicit | [0, 5]   |
//! | Figure4  | −1   | −2   | 5e-3  | implicit | [0, 10]  |
//! | Figure5  | −1   | −2   | 5e-3  | explicit | [0, 5]   |
//!
//! The intervals are reproduction choices. Figure4 runs to 10 so the signed
//! error passes through several zeros of the oscillating solution.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::analysis::{
    direct_local_errors, error_bound, global_errors, growth_rate, order_from_errors,
    recover_local_errors, signed_c_curve, BoundModel,
};
use crate::analysis::{measure_global_errors, ZERO_ERROR_TOL};
use crate::error::{Result, VideError};
use crate::mesh::Mesh;
use crate::problems::{test_equation, ProblemSpec, TestEquationParams};
use crate::stepper::{integrate, ImplicitSolveConfig};
use crate::table::{ResultTable, TableMetadata};
use crate::trajectory::{Method, Trajectory};

/// A run is reported as divergent when it hits the stepper cutoff or when its
/// global error grows beyond this magnitude.
pub const DIVERGENCE_ERROR_THRESHOLD: f64 = 1e10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Figure1,
    Figure2,
    Figure3,
    Figure4,
    Figure5,
    OrderStudy,
    ConsistencyStudy,
}

impl ExperimentKind {
    pub const FIGURES: [ExperimentKind; 5] = [
        ExperimentKind::Figure1,
        ExperimentKind::Figure2,
        ExperimentKind::Figure3,
        ExperimentKind::Figure4,
        ExperimentKind::Figure5,
    ];

    pub fn figure(id: u8) -> Result<Self> {
        match id {
            1..=5 => Ok(Self::FIGURES[id as usize - 1]),
            _ => Err(VideError::InvalidConfig(format!(
                "no figure {id}; expected 1 to 5"
            ))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Figure1 => "figure1",
            ExperimentKind::Figure2 => "figure2",
            ExperimentKind::Figure3 => "figure3",
            ExperimentKind::Figure4 => "figure4",
            ExperimentKind::Figure5 => "figure5",
            ExperimentKind::OrderStudy => "order-study",
            ExperimentKind::ConsistencyStudy => "consistency-study",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = VideError;

    fn from_str(s: &str) -> Result<Self> {
        if let Ok(id) = s.parse::<u8>() {
            return ExperimentKind::figure(id);
        }
        [
            ExperimentKind::Figure1,
            ExperimentKind::Figure2,
            ExperimentKind::Figure3,
            ExperimentKind::Figure4,
            ExperimentKind::Figure5,
            ExperimentKind::OrderStudy,
            ExperimentKind::ConsistencyStudy,
        ]
        .into_iter()
        .find(|k| k.as_str() == s)
        .ok_or_else(|| VideError::InvalidConfig(format!("unknown experiment `{s}`")))
    }
}

/// Optional replacements for an experiment's defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub lambda: Option<f64>,
    pub gamma: Option<f64>,
    pub x0: Option<f64>,
    pub xf: Option<f64>,
    pub h: Option<f64>,
    pub method: Option<Method>,
    pub h_list: Option<Vec<f64>>,
    pub solver: Option<ImplicitSolveConfig>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub params: TestEquationParams,
    pub mesh: Mesh,
    pub method: Method,
    /// Step sizes for the order and consistency studies.
    pub h_list: Vec<f64>,
    pub solver: ImplicitSolveConfig,
}

impl ExperimentSpec {
    pub fn defaults(kind: ExperimentKind) -> Self {
        use ExperimentKind::*;
        let (lambda, gamma, h, method, xf) = match kind {
            Figure1 => (-100.0, -200.0, 5e-3, Method::Explicit, 5.0),
            Figure2 => (-100.0, -200.0, 5e-2, Method::Explicit, 2.0),
            Figure3 => (1.0, 2.0, 5e-3, Method::Explicit, 5.0),
            Figure4 => (-1.0, -2.0, 5e-3, Method::Implicit, 10.0),
            Figure5 => (-1.0, -2.0, 5e-3, Method::Explicit, 5.0),
            OrderStudy => (-1.0, -2.0, 0.02, Method::Explicit, 5.0),
            ConsistencyStudy => (-1.0, -2.0, 0.04, Method::Explicit, 5.0),
        };
        let h_list = match kind {
            ConsistencyStudy => vec![0.04, 0.02, 0.01],
            _ => vec![0.02, 0.01, 0.005],
        };
        ExperimentSpec {
            kind,
            params: TestEquationParams::new(lambda, gamma),
            mesh: Mesh::new(0.0, xf, h).expect("default meshes tile"),
            method,
            h_list,
            solver: ImplicitSolveConfig::default(),
        }
    }

    pub fn with_overrides(mut self, overrides: &Overrides) -> Result<Self> {
        if let Some(lambda) = overrides.lambda {
            self.params.lambda = lambda;
        }
        if let Some(gamma) = overrides.gamma {
            self.params.gamma = gamma;
        }
        if let Some(method) = overrides.method {
            self.method = method;
        }
        if let Some(h_list) = &overrides.h_list {
            self.h_list = h_list.clone();
        }
        if let Some(solver) = overrides.solver {
            self.solver = solver;
        }
        let x0 = overrides.x0.unwrap_or(self.mesh.x0());
        let xf = overrides.xf.unwrap_or(self.mesh.xf());
        let h = overrides.h.unwrap_or(self.mesh.h());
        self.mesh = Mesh::new(x0, xf, h)?;
        Ok(self)
    }

    fn problem_spec(&self) -> ProblemSpec {
        ProblemSpec::test_equation(self.params.lambda, self.params.gamma)
    }
}

fn metadata(spec: &ExperimentSpec) -> TableMetadata {
    TableMetadata {
        experiment: spec.kind.as_str().to_string(),
        problem: Some(spec.problem_spec()),
        method: Some(spec.method),
        mesh: Some(spec.mesh),
        solver: (spec.method == Method::Implicit).then_some(spec.solver),
        ..Default::default()
    }
}

fn index_and_abscissa(table: &mut ResultTable, traj: &Trajectory) -> Result<()> {
    table.push_index("i", (0..traj.len()).collect())?;
    table.push_real("x", traj.nodes().map(|(x, _)| x).collect())
}

fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Runs one experiment end to end.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ResultTable> {
    let started = Instant::now();
    let mut table = match spec.kind {
        ExperimentKind::OrderStudy => run_order_study(
            &spec.problem_spec(),
            spec.mesh.xf(),
            &spec.h_list,
            spec.method,
            &spec.solver,
        )?,
        ExperimentKind::ConsistencyStudy => run_consistency_study(
            &spec.problem_spec(),
            spec.mesh.xf(),
            &spec.h_list,
            spec.method,
            &spec.solver,
        )?,
        _ => run_figure(spec)?,
    };
    table.metadata.experiment = spec.kind.as_str().to_string();
    table.metadata.runtime_seconds = started.elapsed().as_secs_f64();
    Ok(table)
}

fn run_figure(spec: &ExperimentSpec) -> Result<ResultTable> {
    let problem = test_equation(spec.params);
    let traj = integrate(&problem, &spec.mesh, spec.method, &spec.solver)?;
    let deltas = global_errors(&traj, &problem)?;
    let mut table = ResultTable::new(metadata(spec));
    index_and_abscissa(&mut table, &traj)?;

    let max_error = max_abs(&deltas);
    let meta = &mut table.metadata;
    meta.error_source = Some(crate::analysis::ErrorSource::AgainstExact);
    meta.max_abs_error = Some(max_error);
    meta.divergence = traj.divergence;
    meta.diverged = traj.diverged() || max_error > DIVERGENCE_ERROR_THRESHOLD;

    if spec.kind == ExperimentKind::Figure5 {
        let local = recover_local_errors(&deltas, &problem, &traj)?;
        table.push_real("delta", deltas)?;
        table.push_real("epsilon", local)?;
        return Ok(table);
    }

    let rate = growth_rate(&problem, &traj, spec.method)?;
    let (model, estimate) = BoundModel::fit(&deltas, rate, &spec.mesh)?;
    let mut bound = error_bound(&model, &spec.mesh)?;
    bound.truncate(deltas.len());

    let meta = &mut table.metadata;
    meta.growth_rate = Some(rate);
    meta.sign_case = Some(model.sign_case);
    meta.c_max = Some(estimate.max);
    meta.c_tilde = Some(model.c_tilde);
    meta.warnings = model.warnings.iter().map(ToString::to_string).collect();

    if spec.kind == ExperimentKind::Figure4 {
        let signed = signed_c_curve(&deltas, rate, &spec.mesh);
        let lower = bound.iter().map(|u| -u).collect();
        table.push_real("delta", deltas)?;
        table.push_optional("c_curve", signed)?;
        table.push_real("bound", bound)?;
        table.push_real("lower_bound", lower)?;
    } else {
        table.push_real("delta_abs", deltas.iter().map(|d| d.abs()).collect())?;
        table.push_optional("c_curve", estimate.curve)?;
        table.push_real("bound", bound)?;
    }
    Ok(table)
}

/// Global error at `x_d` for each step size and the observed order between
/// consecutive step sizes (the first row has no order).
pub fn run_order_study(
    problem: &ProblemSpec,
    x_d: f64,
    h_list: &[f64],
    method: Method,
    cfg: &ImplicitSolveConfig,
) -> Result<ResultTable> {
    let started = Instant::now();
    if h_list.len() < 2 {
        return Err(VideError::InvalidConfig(
            "an order study needs at least two step sizes".into(),
        ));
    }
    let vide = problem.build()?;
    let mut errors = Vec::with_capacity(h_list.len());
    let mut source = None;
    for &h in h_list {
        let mesh = Mesh::new(vide.x0(), x_d, h)?;
        let traj = integrate(&vide, &mesh, method, cfg)?;
        if traj.diverged() {
            return Err(VideError::InvalidConfig(format!(
                "run with h = {h} diverged before reaching x = {x_d}"
            )));
        }
        let (deltas, s) = measure_global_errors(&traj, &vide)?;
        source = Some(s);
        errors.push(*deltas.last().expect("at least two nodes"));
    }
    let mut orders = vec![f64::NAN];
    for k in 1..h_list.len() {
        orders.push(order_from_errors(
            errors[k - 1],
            errors[k],
            h_list[k - 1],
            h_list[k],
        )?);
    }
    let mut table = ResultTable::new(TableMetadata {
        experiment: ExperimentKind::OrderStudy.as_str().to_string(),
        problem: Some(*problem),
        method: Some(method),
        solver: (method == Method::Implicit).then_some(*cfg),
        error_source: source,
        ..Default::default()
    });
    table.push_real("h", h_list.to_vec())?;
    table.push_real("delta", errors.clone())?;
    table.push_real("delta_abs", errors.iter().map(|e| e.abs()).collect())?;
    table.push_real("order", orders)?;
    table.metadata.runtime_seconds = started.elapsed().as_secs_f64();
    Ok(table)
}

/// Maximum direct local error over `[x0, xf]` for each step size and the
/// observed local order between consecutive step sizes. Orders are `NaN`
/// where the local error vanishes.
pub fn run_consistency_study(
    problem: &ProblemSpec,
    xf: f64,
    h_list: &[f64],
    method: Method,
    cfg: &ImplicitSolveConfig,
) -> Result<ResultTable> {
    let started = Instant::now();
    let vide = problem.build()?;
    if !vide.has_exact() {
        return Err(VideError::MissingExact);
    }
    let mut maxima = Vec::with_capacity(h_list.len());
    for &h in h_list {
        let mesh = Mesh::new(vide.x0(), xf, h)?;
        maxima.push(max_abs(&direct_local_errors(&vide, &mesh, method, cfg)?));
    }
    let mut orders = vec![f64::NAN];
    for k in 1..h_list.len() {
        let q = if maxima[k - 1] > ZERO_ERROR_TOL && maxima[k] > ZERO_ERROR_TOL {
            order_from_errors(maxima[k - 1], maxima[k], h_list[k - 1], h_list[k])?
        } else {
            f64::NAN
        };
        orders.push(q);
    }
    let mut table = ResultTable::new(TableMetadata {
        experiment: ExperimentKind::ConsistencyStudy.as_str().to_string(),
        problem: Some(*problem),
        method: Some(method),
        solver: (method == Method::Implicit).then_some(*cfg),
        error_source: Some(crate::analysis::ErrorSource::AgainstExact),
        ..Default::default()
    });
    table.push_real("h", h_list.to_vec())?;
    table.push_real("max_local_error", maxima)?;
    table.push_real("order", orders)?;
    table.metadata.runtime_seconds = started.elapsed().as_secs_f64();
    Ok(table)
}

/// Runs independent experiments on separate threads, preserving order.
pub fn run_experiments(specs: &[ExperimentSpec]) -> Vec<Result<ResultTable>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = specs
            .iter()
            .map(|spec| scope.spawn(move || run_experiment(spec)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("experiment thread panicked"))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{ManufacturedId, ProblemId};

    #[test]
    fn figure_defaults() {
        let f1 = ExperimentSpec::defaults(ExperimentKind::Figure1);
        assert_eq!((f1.params.lambda, f1.params.gamma), (-100.0, -200.0));
        assert_eq!(f1.mesh.h(), 5e-3);
        assert_eq!(f1.method, Method::Explicit);
        let f2 = ExperimentSpec::defaults(ExperimentKind::Figure2);
        assert_eq!(f2.mesh.h(), 5e-2);
        assert_eq!(f2.mesh.xf(), 2.0);
        let f3 = ExperimentSpec::defaults(ExperimentKind::Figure3);
        assert_eq!((f3.params.lambda, f3.params.gamma), (1.0, 2.0));
        let f4 = ExperimentSpec::defaults(ExperimentKind::Figure4);
        assert_eq!(f4.method, Method::Implicit);
        assert_eq!((f4.params.lambda, f4.params.gamma), (-1.0, -2.0));
        let f5 = ExperimentSpec::defaults(ExperimentKind::Figure5);
        assert_eq!(f5.method, Method::Explicit);
    }

    #[test]
    fn experiment_kind_parsing() {
        assert_eq!(
            "1".parse::<ExperimentKind>().unwrap(),
            ExperimentKind::Figure1
        );
        assert_eq!(
            "figure4".parse::<ExperimentKind>().unwrap(),
            ExperimentKind::Figure4
        );
        assert_eq!(
            "order-study".parse::<ExperimentKind>().unwrap(),
            ExperimentKind::OrderStudy
        );
        assert!("6".parse::<ExperimentKind>().is_err());
    }

    #[test]
    fn overrides_replace_defaults() {
        let spec = ExperimentSpec::defaults(ExperimentKind::Figure1)
            .with_overrides(&Overrides {
                lambda: Some(-50.0),
                xf: Some(1.0),
                h: Some(0.01),
                ..Default::default()
            })
            .unwrap();
        assert_eq!(spec.params.lambda, -50.0);
        assert_eq!(spec.params.gamma, -200.0);
        assert_eq!(spec.mesh.n_steps(), 100);
        let bad = ExperimentSpec::defaults(ExperimentKind::Figure1).with_overrides(&Overrides {
            h: Some(0.3),
            xf: Some(1.0),
            ..Default::default()
        });
        assert!(matches!(bad, Err(VideError::NonTilingStep { .. })));
    }

    #[test]
    fn figure_tables_have_expected_columns() {
        let small = Overrides {
            xf: Some(0.5),
            ..Default::default()
        };
        let expect: [(ExperimentKind, &[&str]); 3] = [
            (
                ExperimentKind::Figure1,
                &["i", "x", "delta_abs", "c_curve", "bound"],
            ),
            (
                ExperimentKind::Figure4,
                &["i", "x", "delta", "c_curve", "bound", "lower_bound"],
            ),
            (ExperimentKind::Figure5, &["i", "x", "delta", "epsilon"]),
        ];
        for (kind, columns) in expect {
            let spec = ExperimentSpec::defaults(kind)
                .with_overrides(&small)
                .unwrap();
            let table = run_experiment(&spec).unwrap();
            assert_eq!(table.column_names(), columns);
            assert_eq!(table.len(), 101);
        }
    }

    #[test]
    fn consistency_study_of_still_problem() {
        // y' = −y from y0 = 0 stays at zero, so every local error vanishes
        let spec = ProblemSpec::manufactured(ManufacturedId::PureOde, 0.0);
        assert_eq!(spec.id, ProblemId::PureOde);
        let table = run_consistency_study(
            &spec,
            1.0,
            &[0.1, 0.05],
            Method::Explicit,
            &Default::default(),
        )
        .unwrap();
        assert!(table
            .real("max_local_error")
            .unwrap()
            .iter()
            .all(|e| *e == 0.0));
        assert!(table.real("order").unwrap().iter().all(|q| q.is_nan()));
    }

    #[test]
    fn concurrent_runs_match_sequential_runs() {
        let small = Overrides {
            xf: Some(0.5),
            ..Default::default()
        };
        let specs: Vec<_> = [
            ExperimentKind::Figure1,
            ExperimentKind::Figure4,
            ExperimentKind::Figure5,
        ]
        .into_iter()
        .map(|k| ExperimentSpec::defaults(k).with_overrides(&small).unwrap())
        .collect();
        let parallel = run_experiments(&specs);
        for (spec, table) in specs.iter().zip(parallel) {
            let a = table.unwrap().to_csv_string().unwrap();
            let b = run_experiment(spec).unwrap().to_csv_string().unwrap();
            assert_eq!(a, b);
        }
    }
}
