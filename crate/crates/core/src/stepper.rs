//! The explicit and implicit Euler-trapezium steppers.
//!
//! Both schemes advance `w_i -> w_{i+1}` with an Euler step for the
//! derivative and a composite trapezium rule for the memory integral. The
//! outer abscissa of the kernel is `x_i` for the explicit step and `x_{i+1}`
//! for the implicit step, so the whole history is re-weighted every step and
//! a run costs `O(n²)` kernel evaluations.

use serde::{Deserialize, Serialize};

use crate::error::{Result, VideError};
use crate::mesh::Mesh;
use crate::problem::VideProblem;
use crate::trajectory::{Divergence, Method, StepDiagnostics, Trajectory};

/// Magnitude beyond which a run is treated as divergent and cut off.
pub const DIVERGENCE_CUTOFF: f64 = 1e300;

const SINGULAR_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStrategy {
    /// Newton's method using the analytic `f_y` and `K_y`.
    NewtonWithJacobians,
    /// Plain substitution `u <- w_i + h f(x_{i+1}, u) + ...`.
    FixedPoint,
}

/// How the implicit step equation is solved for `w_{i+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImplicitSolveConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_iterations: usize,
    pub strategy: SolveStrategy,
}

impl Default for ImplicitSolveConfig {
    fn default() -> Self {
        ImplicitSolveConfig {
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            max_iterations: 50,
            strategy: SolveStrategy::NewtonWithJacobians,
        }
    }
}

impl ImplicitSolveConfig {
    pub fn validate(&self, problem: &VideProblem) -> Result<()> {
        if self.rel_tol.is_nan()
            || self.rel_tol <= 0.0
            || self.abs_tol.is_nan()
            || self.abs_tol <= 0.0
        {
            return Err(VideError::InvalidConfig(format!(
                "tolerances must be positive (rel_tol = {}, abs_tol = {})",
                self.rel_tol, self.abs_tol
            )));
        }
        if self.max_iterations == 0 {
            return Err(VideError::InvalidConfig(
                "max_iterations must be at least 1".into(),
            ));
        }
        if self.strategy == SolveStrategy::NewtonWithJacobians && !problem.has_jacobians() {
            return Err(VideError::MissingJacobian);
        }
        Ok(())
    }

    fn converged(&self, residual: f64, u: f64) -> bool {
        residual.abs() <= self.rel_tol * u.abs() + self.abs_tol
    }
}

fn checked(value: f64, step: usize, what: &'static str, x: f64) -> Result<f64> {
    if value.is_nan() {
        Err(VideError::StepEvaluation { step, what, x })
    } else {
        Ok(value)
    }
}

fn eval_f(problem: &VideProblem, step: usize, x: f64, y: f64) -> Result<f64> {
    checked(problem.f(x, y), step, "f", x)
}

fn eval_kernel(problem: &VideProblem, step: usize, x: f64, y: f64, t: f64) -> Result<f64> {
    checked(problem.kernel(x, y, t), step, "kernel", x)
}

/// Composite trapezium approximation, scaled by `h`, of the memory term:
///
/// ```text
/// (h²/2) · ( Σ_{j=0}^{last} 2K(x_outer, v_j, x_j) − K(x_outer, v_0, x_0) − K(x_outer, v_last, x_last) )
/// ```
///
/// The end weights cancel completely when `last_index == 0`.
pub fn history_sum(
    problem: &VideProblem,
    values: &[f64],
    mesh: &Mesh,
    outer_index: usize,
    last_index: usize,
) -> Result<f64> {
    if last_index > outer_index || outer_index > mesh.n_steps() || values.len() <= last_index {
        return Err(VideError::IndexOutOfRange {
            outer: outer_index,
            last: last_index,
            available: values.len(),
        });
    }
    if last_index == 0 {
        return Ok(0.0);
    }
    let x = mesh.node(outer_index);
    let k = |j: usize| eval_kernel(problem, outer_index, x, values[j], mesh.node(j));
    let mut interior = 0.0;
    for j in 1..last_index {
        interior += k(j)?;
    }
    let ends = k(0)? + k(last_index)?;
    let h = mesh.h();
    Ok(0.5 * h * h * (ends + 2.0 * interior))
}

fn require_step(values: &[f64], mesh: &Mesh, i: usize) -> Result<()> {
    if i >= mesh.n_steps() || values.len() <= i {
        return Err(VideError::IndexOutOfRange {
            outer: i + 1,
            last: i,
            available: values.len(),
        });
    }
    Ok(())
}

/// `w_{i+1} = w_i + h f(x_i, w_i) + history_sum(outer = i, last = i)`.
pub fn explicit_step(problem: &VideProblem, values: &[f64], mesh: &Mesh, i: usize) -> Result<f64> {
    require_step(values, mesh, i)?;
    let x = mesh.node(i);
    let w = values[i];
    let memory = history_sum(problem, values, mesh, i, i)?;
    Ok(w + mesh.h() * eval_f(problem, i, x, w)? + memory)
}

/// The part of the implicit step equation that does not depend on the
/// unknown: `w_i + (h²/2)(Σ_{j=0}^{i} 2K(x_{i+1}, w_j, x_j) − K(x_{i+1}, w_0, x_0))`.
fn implicit_known_part(
    problem: &VideProblem,
    values: &[f64],
    mesh: &Mesh,
    i: usize,
) -> Result<f64> {
    let h = mesh.h();
    let x_next = mesh.node(i + 1);
    let trapezium = history_sum(problem, values, mesh, i + 1, i)?;
    let last = eval_kernel(problem, i, x_next, values[i], mesh.node(i))?;
    Ok(values[i] + trapezium + 0.5 * h * h * last)
}

/// Solves the implicit step equation `R(u) = 0` for `u = w_{i+1}`, where
///
/// ```text
/// R(u) = u − w_i − h f(x_{i+1}, u)
///          − (h²/2)(Σ_{j=0}^{i} 2K(x_{i+1}, w_j, x_j) − K(x_{i+1}, w_0, x_0) + K(x_{i+1}, u, x_{i+1}))
/// ```
///
/// The iteration starts from the explicit step. A returned value always
/// satisfies `|R(u)| <= rel_tol·|u| + abs_tol`.
pub fn implicit_step(
    problem: &VideProblem,
    values: &[f64],
    mesh: &Mesh,
    i: usize,
    cfg: &ImplicitSolveConfig,
) -> Result<(f64, StepDiagnostics)> {
    require_step(values, mesh, i)?;
    cfg.validate(problem)?;
    let h = mesh.h();
    let half_h2 = 0.5 * h * h;
    let x_next = mesh.node(i + 1);
    let known = implicit_known_part(problem, values, mesh, i)?;

    let residual = |u: f64| -> Result<f64> {
        let f = eval_f(problem, i, x_next, u)?;
        let k = eval_kernel(problem, i, x_next, u, x_next)?;
        Ok(u - known - h * f - half_h2 * k)
    };

    let mut u = explicit_step(problem, values, mesh, i)?;
    let mut r = f64::NAN;
    for iteration in 1..=cfg.max_iterations {
        r = residual(u)?;
        if cfg.converged(r, u) {
            return Ok((
                u,
                StepDiagnostics {
                    iterations: iteration,
                    residual: r,
                },
            ));
        }
        u = match cfg.strategy {
            SolveStrategy::NewtonWithJacobians => {
                let slope = 1.0
                    - h * problem.f_y(x_next, u)?
                    - half_h2 * problem.kernel_y(x_next, u, x_next)?;
                if slope.abs() < SINGULAR_TOL || slope.is_nan() {
                    return Err(VideError::SingularJacobian {
                        step: i,
                        value: slope,
                    });
                }
                u - r / slope
            }
            SolveStrategy::FixedPoint => u - r,
        };
        if !u.is_finite() {
            break;
        }
    }
    Err(VideError::NoConvergence {
        step: i,
        iterations: cfg.max_iterations,
        residual: r,
    })
}

/// Runs the selected method over the whole mesh.
///
/// A run whose values exceed [`DIVERGENCE_CUTOFF`] (or stop being finite) is
/// truncated before the offending value and returned with `divergence` set;
/// that is not an error.
pub fn integrate(
    problem: &VideProblem,
    mesh: &Mesh,
    method: Method,
    cfg: &ImplicitSolveConfig,
) -> Result<Trajectory> {
    if (mesh.x0() - problem.x0()).abs() > 1e-12 * problem.x0().abs().max(1.0) {
        return Err(VideError::InvalidConfig(format!(
            "mesh starts at {} but the problem is posed from {}",
            mesh.x0(),
            problem.x0()
        )));
    }
    if method == Method::Implicit {
        cfg.validate(problem)?;
    }
    let mut w = Vec::with_capacity(mesh.len());
    w.push(problem.y0());
    let mut step_diagnostics = Vec::with_capacity(mesh.n_steps());
    let mut divergence = None;
    for i in 0..mesh.n_steps() {
        let (next, diag) = match method {
            Method::Explicit => (
                explicit_step(problem, &w, mesh, i)?,
                StepDiagnostics::default(),
            ),
            Method::Implicit => implicit_step(problem, &w, mesh, i, cfg)?,
        };
        if !next.is_finite() || next.abs() > DIVERGENCE_CUTOFF {
            divergence = Some(Divergence {
                step: i + 1,
                magnitude: next.abs(),
            });
            break;
        }
        w.push(next);
        step_diagnostics.push(diag);
    }
    Ok(Trajectory {
        mesh: *mesh,
        w,
        method,
        step_diagnostics,
        divergence,
        solve_config: *cfg,
    })
}
