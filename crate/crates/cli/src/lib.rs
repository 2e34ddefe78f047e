//! Command-line front end for `videstep`.
//!
//! Every subcommand resolves its settings from three layers: built-in
//! defaults, an optional `--config` file, and command-line flags (highest
//! priority). Tables go to `--out`, to `$VIDESTEP_OUT_DIR`, or to stdout.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use videstep::analysis::{
    direct_local_errors, error_bound, growth_rate, measure_global_errors, recover_local_errors,
    BoundModel,
};
use videstep::experiments::{
    run_consistency_study, run_experiment, run_order_study, ExperimentKind, ExperimentSpec,
    Overrides, DIVERGENCE_ERROR_THRESHOLD,
};
use videstep::problems::{ProblemId, ProblemSpec, TestEquationParams, TEST_EQUATION_Y0};
use videstep::table::{ResultTable, TableMetadata};
use videstep::{integrate, ImplicitSolveConfig, Mesh, Method, SolveStrategy, VideError};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "VIDESTEP_OUT_DIR";

pub const EXIT_OK: u8 = 0;
pub const EXIT_IO: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

const USAGE_HINT: &str =
    "usage: videstep <solve|errors|bound|order|local|figure|consistency> [OPTIONS] (see --help)";

#[derive(Debug, Parser)]
#[command(
    name = "videstep",
    version,
    about = "Euler-Trapezium solvers for Volterra integro-differential equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate a problem and print the trajectory.
    Solve(CommonArgs),
    /// Global errors against the exact solution or a refined reference run.
    Errors(CommonArgs),
    /// Growth rate, amplitude estimate and global-error bound.
    Bound(CommonArgs),
    /// Observed global order at `--xf` over `--h-list`.
    Order(CommonArgs),
    /// Local errors recovered from the global errors, and measured directly
    /// when an exact solution is known.
    Local(CommonArgs),
    /// Reproduce one of the five reference figures.
    Figure(FigureArgs),
    /// Maximum local error and its order over `--h-list`.
    Consistency(CommonArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Solve(_) => "solve",
            Command::Errors(_) => "errors",
            Command::Bound(_) => "bound",
            Command::Order(_) => "order",
            Command::Local(_) => "local",
            Command::Figure(_) => "figure",
            Command::Consistency(_) => "consistency",
        }
    }

    fn common(&self) -> &CommonArgs {
        match self {
            Command::Figure(f) => &f.common,
            Command::Solve(a)
            | Command::Errors(a)
            | Command::Bound(a)
            | Command::Order(a)
            | Command::Local(a)
            | Command::Consistency(a) => a,
        }
    }
}

#[derive(Debug, Args)]
struct FigureArgs {
    /// Figure number, 1 to 5.
    #[arg(long)]
    id: Option<u8>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// TOML settings file, or a JSON sidecar written by a previous run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// test-equation, pure-ode, constant-kernel or cubic-kernel.
    #[arg(long)]
    problem: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    y0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    x0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    xf: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    h: Option<f64>,
    /// explicit or implicit.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    max_iterations: Option<usize>,
    /// newton or fixed-point.
    #[arg(long)]
    strategy: Option<String>,
    /// Comma-separated step sizes for `order` and `consistency`.
    #[arg(long, value_delimiter = ',')]
    h_list: Option<Vec<f64>>,
    /// Output file. CSV output also writes a `.json` metadata sidecar.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Exit 0 even when the run diverges.
    #[arg(long)]
    allow_divergence: bool,
}

/// Settings as they appear in a config file. Every field is optional and
/// unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub problem: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xf: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategy: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_list: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub allow_divergence: Option<bool>,
}

impl FileConfig {
    /// Reads TOML, or JSON when the file name ends in `.json`. A JSON
    /// document with a `config` key is treated as a sidecar and only that
    /// key is read.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let bad = |e: &dyn std::fmt::Display| CliError::Usage(format!("{}: {e}", path.display()));
        if path.extension().is_some_and(|e| e == "json") {
            let mut value: Value = serde_json::from_str(&text).map_err(|e| bad(&e))?;
            if let Some(config) = value.get_mut("config") {
                value = config.take();
            }
            serde_json::from_value(value).map_err(|e| bad(&e))
        } else {
            toml::from_str(&text).map_err(|e| bad(&e))
        }
    }

    fn overlay(&mut self, args: &CommonArgs) {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if args.$field.is_some() {
                    self.$field = args.$field.clone();
                })*
            };
        }
        take!(
            problem,
            lambda,
            gamma,
            y0,
            x0,
            xf,
            h,
            method,
            rel_tol,
            abs_tol,
            max_iterations,
            strategy,
            h_list,
            out,
            format
        );
        if args.allow_divergence {
            self.allow_divergence = Some(true);
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Library(#[from] VideError),
    #[error("{0}")]
    Io(String),
    #[error("run diverged ({0}); pass --allow-divergence to accept it")]
    Diverged(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
            CliError::Diverged(_) => EXIT_NUMERICAL,
            CliError::Library(e) if e.is_numerical() => EXIT_NUMERICAL,
            CliError::Library(VideError::Io(_) | VideError::Csv(_)) => EXIT_IO,
            CliError::Library(_) => EXIT_USAGE,
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

fn parse<T: FromStr<Err = VideError>>(value: &str) -> Result<T, CliError> {
    value.parse().map_err(CliError::Library)
}

fn parse_strategy(value: &str) -> Result<SolveStrategy, CliError> {
    match value {
        "newton" | "newton-with-jacobians" => Ok(SolveStrategy::NewtonWithJacobians),
        "fixed-point" => Ok(SolveStrategy::FixedPoint),
        other => Err(CliError::Usage(format!(
            "unknown strategy `{other}` (expected newton or fixed-point)"
        ))),
    }
}

fn strategy_name(strategy: SolveStrategy) -> &'static str {
    match strategy {
        SolveStrategy::NewtonWithJacobians => "newton",
        SolveStrategy::FixedPoint => "fixed-point",
    }
}

fn solver_config(cfg: &FileConfig) -> Result<ImplicitSolveConfig, CliError> {
    let defaults = ImplicitSolveConfig::default();
    Ok(ImplicitSolveConfig {
        rel_tol: cfg.rel_tol.unwrap_or(defaults.rel_tol),
        abs_tol: cfg.abs_tol.unwrap_or(defaults.abs_tol),
        max_iterations: cfg.max_iterations.unwrap_or(defaults.max_iterations),
        strategy: cfg
            .strategy
            .as_deref()
            .map(parse_strategy)
            .transpose()?
            .unwrap_or(defaults.strategy),
    })
}

/// Fully resolved settings for a non-figure command.
struct Resolved {
    problem: ProblemSpec,
    mesh: Mesh,
    method: Method,
    solver: ImplicitSolveConfig,
    h_list: Vec<f64>,
}

impl Resolved {
    fn from_config(command: &str, cfg: &FileConfig) -> Result<Self, CliError> {
        let id: ProblemId = parse(cfg.problem.as_deref().unwrap_or("test-equation"))?;
        let problem = ProblemSpec {
            id,
            params: TestEquationParams::new(cfg.lambda.unwrap_or(-1.0), cfg.gamma.unwrap_or(-2.0)),
            y0: cfg.y0,
        };
        let mesh = Mesh::new(
            cfg.x0.unwrap_or(0.0),
            cfg.xf.unwrap_or(5.0),
            cfg.h.unwrap_or(5e-3),
        )?;
        let default_h_list = if command == "consistency" {
            vec![0.04, 0.02, 0.01]
        } else {
            vec![0.02, 0.01, 0.005]
        };
        Ok(Resolved {
            problem,
            mesh,
            method: cfg
                .method
                .as_deref()
                .map(parse)
                .transpose()?
                .unwrap_or(Method::Explicit),
            solver: solver_config(cfg)?,
            h_list: cfg.h_list.clone().unwrap_or(default_h_list),
        })
    }

    fn record(&self, command: &str) -> FileConfig {
        FileConfig {
            command: Some(command.to_string()),
            problem: Some(self.problem.id.as_str().to_string()),
            lambda: Some(self.problem.params.lambda),
            gamma: Some(self.problem.params.gamma),
            y0: self.problem.y0,
            x0: Some(self.mesh.x0()),
            xf: Some(self.mesh.xf()),
            h: Some(self.mesh.h()),
            method: Some(self.method.to_string()),
            rel_tol: Some(self.solver.rel_tol),
            abs_tol: Some(self.solver.abs_tol),
            max_iterations: Some(self.solver.max_iterations),
            strategy: Some(strategy_name(self.solver.strategy).to_string()),
            h_list: Some(self.h_list.clone()),
            ..Default::default()
        }
    }

    fn metadata(&self, command: &str) -> TableMetadata {
        TableMetadata {
            experiment: command.to_string(),
            problem: Some(self.problem),
            method: Some(self.method),
            mesh: Some(self.mesh),
            solver: (self.method == Method::Implicit).then_some(self.solver),
            ..Default::default()
        }
    }
}

fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn trajectory_table(command: &str, r: &Resolved) -> Result<ResultTable, CliError> {
    let problem = r.problem.build()?;
    let traj = integrate(&problem, &r.mesh, r.method, &r.solver)?;
    let mut table = ResultTable::new(r.metadata(command));
    table.metadata.divergence = traj.divergence;
    table.metadata.diverged = traj.diverged();
    table.push_index("i", (0..traj.len()).collect())?;
    table.push_real("x", traj.nodes().map(|(x, _)| x).collect())?;

    if command == "solve" {
        table.push_real("w", traj.w.clone())?;
        if problem.has_exact() {
            let exact = traj
                .nodes()
                .map(|(x, _)| problem.exact(x).unwrap_or(f64::NAN))
                .collect();
            table.push_real("exact", exact)?;
        }
        return Ok(table);
    }

    let (deltas, source) = measure_global_errors(&traj, &problem)?;
    let max_error = max_abs(&deltas);
    table.metadata.error_source = Some(source);
    table.metadata.max_abs_error = Some(max_error);
    table.metadata.diverged |= max_error > DIVERGENCE_ERROR_THRESHOLD;

    match command {
        "errors" => {
            table.push_real("delta_abs", deltas.iter().map(|d| d.abs()).collect())?;
            table.push_real("delta", deltas)?;
        }
        "bound" => {
            let rate = growth_rate(&problem, &traj, r.method)?;
            let (model, estimate) = BoundModel::fit(&deltas, rate, &r.mesh)?;
            let mut bound = error_bound(&model, &r.mesh)?;
            bound.truncate(deltas.len());
            let meta = &mut table.metadata;
            meta.growth_rate = Some(rate);
            meta.sign_case = Some(model.sign_case);
            meta.c_max = Some(estimate.max);
            meta.c_tilde = Some(model.c_tilde);
            meta.warnings = model.warnings.iter().map(ToString::to_string).collect();
            table.push_real("delta_abs", deltas.iter().map(|d| d.abs()).collect())?;
            table.push_optional("c_curve", estimate.curve)?;
            table.push_real("bound", bound)?;
        }
        "local" => {
            let recovered = recover_local_errors(&deltas, &problem, &traj)?;
            table.push_real("delta", deltas)?;
            table.push_real("epsilon", recovered)?;
            if problem.has_exact() {
                let mut direct = direct_local_errors(&problem, &r.mesh, r.method, &r.solver)?;
                direct.truncate(traj.len());
                table.push_real("epsilon_direct", direct)?;
            }
        }
        other => unreachable!("no trajectory table for `{other}`"),
    }
    Ok(table)
}

fn figure_spec(cfg: &FileConfig) -> Result<ExperimentSpec, CliError> {
    let id = cfg
        .id
        .ok_or_else(|| CliError::Usage("figure requires --id (1 to 5)".into()))?;
    let kind = ExperimentKind::figure(id).map_err(|e| CliError::Usage(e.to_string()))?;
    if let Some(problem) = cfg.problem.as_deref() {
        if parse::<ProblemId>(problem)? != ProblemId::TestEquation {
            return Err(CliError::Usage(
                "figures are defined on the test equation".into(),
            ));
        }
    }
    if let Some(y0) = cfg.y0 {
        if y0 != TEST_EQUATION_Y0 {
            return Err(CliError::Usage(format!(
                "the test equation starts from y(0) = 2, got y0 = {y0}"
            )));
        }
    }
    let any_solver_key = cfg.rel_tol.is_some()
        || cfg.abs_tol.is_some()
        || cfg.max_iterations.is_some()
        || cfg.strategy.is_some();
    let overrides = Overrides {
        lambda: cfg.lambda,
        gamma: cfg.gamma,
        x0: cfg.x0,
        xf: cfg.xf,
        h: cfg.h,
        method: cfg.method.as_deref().map(parse).transpose()?,
        h_list: cfg.h_list.clone(),
        solver: any_solver_key.then(|| solver_config(cfg)).transpose()?,
    };
    Ok(ExperimentSpec::defaults(kind).with_overrides(&overrides)?)
}

fn figure_record(id: u8, spec: &ExperimentSpec) -> FileConfig {
    FileConfig {
        command: Some("figure".into()),
        id: Some(id),
        problem: Some(ProblemId::TestEquation.as_str().to_string()),
        lambda: Some(spec.params.lambda),
        gamma: Some(spec.params.gamma),
        x0: Some(spec.mesh.x0()),
        xf: Some(spec.mesh.xf()),
        h: Some(spec.mesh.h()),
        method: Some(spec.method.to_string()),
        rel_tol: Some(spec.solver.rel_tol),
        abs_tol: Some(spec.solver.abs_tol),
        max_iterations: Some(spec.solver.max_iterations),
        strategy: Some(strategy_name(spec.solver.strategy).to_string()),
        ..Default::default()
    }
}

fn compute(command: &str, cfg: &FileConfig) -> Result<(ResultTable, FileConfig, String), CliError> {
    if command == "figure" {
        let spec = figure_spec(cfg)?;
        let id = cfg.id.unwrap_or_default();
        let table = run_experiment(&spec)?;
        return Ok((table, figure_record(id, &spec), format!("fig{id}")));
    }
    let started = Instant::now();
    let r = Resolved::from_config(command, cfg)?;
    let mut table = match command {
        "order" => run_order_study(&r.problem, r.mesh.xf(), &r.h_list, r.method, &r.solver)?,
        "consistency" => {
            run_consistency_study(&r.problem, r.mesh.xf(), &r.h_list, r.method, &r.solver)?
        }
        _ => trajectory_table(command, &r)?,
    };
    table.metadata.experiment = command.to_string();
    table.metadata.runtime_seconds = started.elapsed().as_secs_f64();
    Ok((table, r.record(command), command.to_string()))
}

fn output_format(cfg: &FileConfig) -> Result<Format, CliError> {
    match cfg.format.as_deref() {
        Some("csv") => Ok(Format::Csv),
        Some("json") => Ok(Format::Json),
        Some(other) => Err(CliError::Usage(format!(
            "unknown format `{other}` (expected csv or json)"
        ))),
        None if cfg
            .out
            .as_ref()
            .is_some_and(|p| p.extension().is_some_and(|e| e == "json")) =>
        {
            Ok(Format::Json)
        }
        None => Ok(Format::Csv),
    }
}

fn emit(
    table: &ResultTable,
    record: &FileConfig,
    stem: &str,
    cfg: &FileConfig,
) -> Result<Option<PathBuf>, CliError> {
    let format = output_format(cfg)?;
    let extension = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let path = match (&cfg.out, std::env::var_os(OUT_DIR_ENV)) {
        (Some(path), _) => Some(path.clone()),
        (None, Some(dir)) => Some(PathBuf::from(dir).join(format!("{stem}.{extension}"))),
        (None, None) => None,
    };
    let config = serde_json::to_value(record).map_err(VideError::from)?;

    let Some(path) = path else {
        let text = match format {
            Format::Csv => table.to_csv_string()?,
            Format::Json => {
                let mut doc = table.to_json()?;
                doc["config"] = config;
                serde_json::to_string_pretty(&doc).map_err(VideError::from)? + "\n"
            }
        };
        // a closed pipe (`videstep solve | head`) is not a failure
        match io::stdout().lock().write_all(text.as_bytes()) {
            Err(e) if e.kind() != io::ErrorKind::BrokenPipe => return Err(e.into()),
            _ => return Ok(None),
        }
    };

    let write = |p: &Path, bytes: &[u8]| {
        fs::write(p, bytes).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
    };
    match format {
        Format::Csv => {
            let sidecar = path.with_extension("json");
            if sidecar == path {
                return Err(CliError::Usage(format!(
                    "{} would be overwritten by its own sidecar",
                    path.display()
                )));
            }
            write(&path, table.to_csv_string()?.as_bytes())?;
            let doc = json!({ "config": config, "metadata": table.metadata_json()? });
            write(
                &sidecar,
                serde_json::to_string_pretty(&doc)
                    .map_err(VideError::from)?
                    .as_bytes(),
            )?;
        }
        Format::Json => {
            let mut doc = table.to_json()?;
            doc["config"] = config;
            write(
                &path,
                serde_json::to_string_pretty(&doc)
                    .map_err(VideError::from)?
                    .as_bytes(),
            )?;
        }
    }
    Ok(Some(path))
}

fn dispatch(command: &Command) -> Result<(), CliError> {
    let args = command.common();
    let mut cfg = match &args.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    if let Some(stored) = &cfg.command {
        if stored != command.name() {
            return Err(CliError::Usage(format!(
                "config was written for `{stored}`, not `{}`",
                command.name()
            )));
        }
    }
    cfg.overlay(args);
    if let Command::Figure(f) = command {
        if f.id.is_some() {
            cfg.id = f.id;
        }
    }

    let (table, record, stem) = compute(command.name(), &cfg)?;
    if let Some(path) = emit(&table, &record, &stem, &cfg)? {
        eprintln!("wrote {}", path.display());
    }
    for warning in &table.metadata.warnings {
        eprintln!("warning: {warning}");
    }
    if table.metadata.diverged && !cfg.allow_divergence.unwrap_or(false) {
        let detail = match (table.metadata.divergence, table.metadata.max_abs_error) {
            (Some(d), _) => format!("|w| = {:e} at step {}", d.magnitude, d.step),
            (None, Some(e)) => format!("max |error| = {e:e}"),
            (None, None) => "unbounded growth".into(),
        };
        return Err(CliError::Diverged(detail));
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit status.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            let code = e.exit_code();
            if code == EXIT_USAGE {
                eprintln!("{USAGE_HINT}");
            }
            code
        }
    }
}
