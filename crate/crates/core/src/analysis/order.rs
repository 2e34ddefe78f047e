use crate::error::{Result, VideError};
use crate::mesh::Mesh;
use crate::problem::VideProblem;
use crate::stepper::{integrate, ImplicitSolveConfig};
use crate::trajectory::Method;

use super::global::measure_global_errors;

/// Errors at or below this magnitude are treated as zero when measuring an
/// order.
pub const ZERO_ERROR_TOL: f64 = 1e-15;

/// `p = ln(|e1| / |e2|) / ln(h1 / h2)`.
pub fn order_from_errors(e1: f64, e2: f64, h1: f64, h2: f64) -> Result<f64> {
    for (e, h) in [(e1, h1), (e2, h2)] {
        if e.is_nan() || e.abs() <= ZERO_ERROR_TOL {
            return Err(VideError::ZeroError { h, value: e });
        }
    }
    Ok((e1.abs() / e2.abs()).ln() / (h1 / h2).ln())
}

/// Global error at `x_d` for one step size.
pub(crate) fn endpoint_error(
    problem: &VideProblem,
    x_d: f64,
    h: f64,
    method: Method,
    cfg: &ImplicitSolveConfig,
) -> Result<f64> {
    let mesh = Mesh::new(problem.x0(), x_d, h)?;
    let traj = integrate(problem, &mesh, method, cfg)?;
    if traj.diverged() {
        return Err(VideError::InvalidConfig(format!(
            "run with h = {h} diverged before reaching x = {x_d}"
        )));
    }
    let (deltas, _) = measure_global_errors(&traj, problem)?;
    Ok(*deltas.last().expect("mesh has at least two nodes"))
}

/// Observed global order at `x_d` from two step sizes.
pub fn observed_order(
    problem: &VideProblem,
    x_d: f64,
    h1: f64,
    h2: f64,
    method: Method,
    cfg: &ImplicitSolveConfig,
) -> Result<f64> {
    let e1 = endpoint_error(problem, x_d, h1, method, cfg)?;
    let e2 = endpoint_error(problem, x_d, h2, method, cfg)?;
    order_from_errors(e1, e2, h1, h2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn linear_error_model_has_order_one() {
        for (h1, h2) in [(0.02, 0.01), (0.1, 0.025), (0.3, 0.2)] {
            let c = 3.7;
            assert_relative_eq!(
                order_from_errors(c * h1, c * h2, h1, h2).unwrap(),
                1.0,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn quadratic_error_model_has_order_two() {
        assert_relative_eq!(
            order_from_errors(4e-4, 1e-4, 0.02, 0.01).unwrap(),
            2.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn zero_error_is_rejected() {
        assert!(matches!(
            order_from_errors(0.0, 1e-3, 0.02, 0.01),
            Err(VideError::ZeroError { .. })
        ));
        assert!(matches!(
            order_from_errors(1e-3, 1e-16, 0.02, 0.01),
            Err(VideError::ZeroError { .. })
        ));
    }
}
