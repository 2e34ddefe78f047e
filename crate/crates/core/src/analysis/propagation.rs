//! Local errors and the one-step propagation recurrence
//!
//! ```text
//! explicit:  Δ_{i+1} = ε_{i+1} + α_i Δ_i + h² Σ_{j=1}^{i−1} Δ_j K_y(x_j, w_j, x_j)
//! implicit:  Δ_{i+1} = ε_{i+1} + α_i Δ_i + h² Σ_{j=1}^{i−1} Δ_j K_y(x_j, w_j, x_j) / D_{i+1}
//! ```
//!
//! with `Δ_0 = 0`, `D_{i+1} = 1 − h f_y − (h²/2) K_y` at `(x_{i+1}, w_{i+1})`,
//! and `α_i` from [`propagation_coefficient_explicit`] or
//! [`propagation_coefficient_implicit`]. The implicit local error is the
//! solved step seeded with exact history minus the exact value; the step
//! equation's truncation residual equals `D_{i+1} ε_{i+1}`.

use serde::Serialize;

use super::global::{measure_global_errors, ErrorSource};
use crate::error::{Result, VideError};
use crate::mesh::Mesh;
use crate::problem::VideProblem;
use crate::stepper::{explicit_step, implicit_step, ImplicitSolveConfig};
use crate::trajectory::{Method, Trajectory};

const SINGULAR_TOL: f64 = 1e-14;

/// `1 + h f_y(x, y) + (h²/2) K_y(x, y, x)`.
pub fn propagation_coefficient_explicit(
    problem: &VideProblem,
    x: f64,
    y_at: f64,
    h: f64,
) -> Result<f64> {
    Ok(1.0 + h * problem.f_y(x, y_at)? + 0.5 * h * h * problem.kernel_y(x, y_at, x)?)
}

fn implicit_denominator(problem: &VideProblem, x_next: f64, y_next: f64, h: f64) -> Result<f64> {
    let d = 1.0
        - h * problem.f_y(x_next, y_next)?
        - 0.5 * h * h * problem.kernel_y(x_next, y_next, x_next)?;
    if d.abs() <= SINGULAR_TOL || d.is_nan() {
        return Err(VideError::SingularDenominator {
            x: x_next,
            value: d,
        });
    }
    Ok(d)
}

/// `(1 + h² K_y(x_i, y_i, x_i)) / (1 − h f_y(x_{i+1}, y_{i+1}) − (h²/2) K_y(x_{i+1}, y_{i+1}, x_{i+1}))`.
pub fn propagation_coefficient_implicit(
    problem: &VideProblem,
    x_i: f64,
    x_next: f64,
    y_i: f64,
    y_next: f64,
    h: f64,
) -> Result<f64> {
    let d = implicit_denominator(problem, x_next, y_next, h)?;
    Ok((1.0 + h * h * problem.kernel_y(x_i, y_i, x_i)?) / d)
}

/// Per-step `(α_i, memory_i)` where `memory_i` is the contribution of
/// `Δ_1..Δ_{i−1}` to `Δ_{i+1}`.
fn propagation_terms(
    problem: &VideProblem,
    trajectory: &Trajectory,
    deltas: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let n = trajectory.len();
    if deltas.len() != n {
        return Err(VideError::LengthMismatch {
            expected: n,
            found: deltas.len(),
        });
    }
    let mesh = &trajectory.mesh;
    let h = mesh.h();
    let w = &trajectory.w;
    let mut terms = Vec::with_capacity(n.saturating_sub(1));
    // Σ_{j=1}^{i−1} Δ_j K_y(x_j, w_j, x_j)
    let mut weighted = 0.0;
    for i in 0..n.saturating_sub(1) {
        let x = mesh.node(i);
        let x_next = mesh.node(i + 1);
        let term = match trajectory.method {
            Method::Explicit => (
                propagation_coefficient_explicit(problem, x, w[i], h)?,
                h * h * weighted,
            ),
            Method::Implicit => {
                let d = implicit_denominator(problem, x_next, w[i + 1], h)?;
                (
                    (1.0 + h * h * problem.kernel_y(x, w[i], x)?) / d,
                    h * h * weighted / d,
                )
            }
        };
        terms.push(term);
        if i >= 1 {
            weighted += deltas[i] * problem.kernel_y(x, w[i], x)?;
        }
    }
    Ok(terms)
}

/// Recovers local errors from global errors by inverting the propagation
/// recurrence: `ε_1 = Δ_1`, `ε_2 = Δ_2 − α_1 Δ_1`, and in general
/// `ε_{i+1} = Δ_{i+1} − α_i Δ_i − memory_i`. Entry 0 is zero.
pub fn recover_local_errors(
    deltas: &[f64],
    problem: &VideProblem,
    trajectory: &Trajectory,
) -> Result<Vec<f64>> {
    let terms = propagation_terms(problem, trajectory, deltas)?;
    let mut local = Vec::with_capacity(deltas.len());
    local.push(0.0);
    for (i, (alpha, memory)) in terms.into_iter().enumerate() {
        local.push(deltas[i + 1] - alpha * deltas[i] - memory);
    }
    Ok(local)
}

/// `r_{i+1} = Δ_{i+1} − (ε_{i+1} + memory_i) − α_i Δ_i`, and `r_0 = Δ_0 − ε_0`.
///
/// Zero up to rounding for problems linear in `y` when `local` holds the
/// directly measured local errors of the same run.
pub fn propagation_residual(
    deltas: &[f64],
    local: &[f64],
    problem: &VideProblem,
    trajectory: &Trajectory,
) -> Result<Vec<f64>> {
    if local.len() != deltas.len() {
        return Err(VideError::LengthMismatch {
            expected: deltas.len(),
            found: local.len(),
        });
    }
    let terms = propagation_terms(problem, trajectory, deltas)?;
    let mut residual = Vec::with_capacity(deltas.len());
    residual.push(deltas.first().copied().unwrap_or(0.0) - local.first().copied().unwrap_or(0.0));
    for (i, (alpha, memory)) in terms.into_iter().enumerate() {
        let tilde = local[i + 1] + memory;
        residual.push(deltas[i + 1] - tilde - alpha * deltas[i]);
    }
    Ok(residual)
}

/// Local errors measured by taking one step from exact history:
/// `ε_{i+1} = M(y_0, ..., y_i) − y(x_{i+1})`. Entry 0 is zero.
pub fn direct_local_errors(
    problem: &VideProblem,
    mesh: &Mesh,
    method: Method,
    cfg: &ImplicitSolveConfig,
) -> Result<Vec<f64>> {
    if !problem.has_exact() {
        return Err(VideError::MissingExact);
    }
    let exact: Vec<f64> = mesh
        .nodes()
        .map(|x| problem.exact(x).unwrap_or(f64::NAN))
        .collect();
    let mut local = Vec::with_capacity(mesh.len());
    local.push(0.0);
    for i in 0..mesh.n_steps() {
        let history = &exact[..=i];
        let next = match method {
            Method::Explicit => explicit_step(problem, history, mesh, i)?,
            Method::Implicit => implicit_step(problem, history, mesh, i, cfg)?.0,
        };
        local.push(next - exact[i + 1]);
    }
    Ok(local)
}

/// Error quantities for one run.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub deltas: Vec<f64>,
    /// Recovered from `deltas` by [`recover_local_errors`].
    pub local_errors: Vec<f64>,
    /// `alphas[i]` multiplies `Δ_i` in the step to `x_{i+1}`, so there is one
    /// entry fewer than there are nodes.
    pub alphas: Vec<f64>,
    pub source: ErrorSource,
}

pub fn analyze(problem: &VideProblem, trajectory: &Trajectory) -> Result<ErrorReport> {
    let (deltas, source) = measure_global_errors(trajectory, problem)?;
    let alphas = propagation_terms(problem, trajectory, &deltas)?
        .into_iter()
        .map(|(alpha, _)| alpha)
        .collect();
    let local_errors = recover_local_errors(&deltas, problem, trajectory)?;
    Ok(ErrorReport {
        deltas,
        local_errors,
        alphas,
        source,
    })
}
