use serde::{Deserialize, Serialize};

use crate::error::{Result, VideError};
use crate::problem::VideProblem;
use crate::stepper::integrate;
use crate::trajectory::Trajectory;

/// Step refinement used for reference runs when no exact solution exists.
/// For a first-order method the reference error is about 1% of the
/// measured error.
pub const REFERENCE_REFINEMENT: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorSource {
    AgainstExact,
    AgainstReferenceRun,
}

/// Signed `Δ_i = w_i − y(x_i)` against the analytic solution.
pub fn global_errors(trajectory: &Trajectory, problem: &VideProblem) -> Result<Vec<f64>> {
    if !problem.has_exact() {
        return Err(VideError::MissingExact);
    }
    Ok(trajectory
        .nodes()
        .map(|(x, w)| w - problem.exact(x).unwrap_or(f64::NAN))
        .collect())
}

/// Re-runs the trajectory's method with the step divided by
/// [`REFERENCE_REFINEMENT`].
pub fn reference_run(problem: &VideProblem, trajectory: &Trajectory) -> Result<Trajectory> {
    let mesh = trajectory.mesh.refined(REFERENCE_REFINEMENT)?;
    integrate(problem, &mesh, trajectory.method, &trajectory.solve_config)
}

/// `Δ_i` against a run on a mesh that refines the trajectory's mesh by an
/// integer factor.
pub fn global_errors_against_reference(
    trajectory: &Trajectory,
    reference: &Trajectory,
) -> Result<Vec<f64>> {
    let coarse = trajectory.mesh.n_steps();
    let fine = reference.mesh.n_steps();
    if !fine.is_multiple_of(coarse) || (reference.mesh.x0() - trajectory.mesh.x0()).abs() > 1e-12 {
        return Err(VideError::InvalidConfig(
            "reference mesh does not refine the trajectory mesh".into(),
        ));
    }
    let factor = fine / coarse;
    let needed = (trajectory.len() - 1) * factor + 1;
    if reference.len() < needed {
        return Err(VideError::LengthMismatch {
            expected: needed,
            found: reference.len(),
        });
    }
    Ok(trajectory
        .w
        .iter()
        .enumerate()
        .map(|(i, w)| w - reference.w[i * factor])
        .collect())
}

/// Global errors against the exact solution when there is one, otherwise
/// against a refined reference run.
pub fn measure_global_errors(
    trajectory: &Trajectory,
    problem: &VideProblem,
) -> Result<(Vec<f64>, ErrorSource)> {
    if problem.has_exact() {
        return Ok((
            global_errors(trajectory, problem)?,
            ErrorSource::AgainstExact,
        ));
    }
    let reference = reference_run(problem, trajectory)?;
    Ok((
        global_errors_against_reference(trajectory, &reference)?,
        ErrorSource::AgainstReferenceRun,
    ))
}
