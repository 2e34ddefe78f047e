//! Growth rate, amplitude estimate and the global-error envelope
//!
//! ```text
//! U_i = | (C̃ h / L) (e^{(x_i − x_0) L} − 1) |     L ≠ 0
//! U_i = C̃ (x_i − x_0) h                           L = 0
//! ```

use std::fmt;

use serde::Serialize;

use crate::error::{Result, VideError};
use crate::mesh::Mesh;
use crate::problem::VideProblem;
use crate::trajectory::{Method, Trajectory};

/// Rates at or below this magnitude use the linear (`L = 0`) envelope.
pub const ZERO_RATE_TOL: f64 = 1e-14;

/// Nodes whose exponential factor `|e^{(x − x0)L} − 1|` is at or below this
/// are left out of the amplitude estimate.
const DENOMINATOR_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SignCase {
    Positive,
    Negative,
    Zero,
}

impl SignCase {
    pub fn of(rate: f64) -> Self {
        if rate.abs() <= ZERO_RATE_TOL {
            SignCase::Zero
        } else if rate > 0.0 {
            SignCase::Positive
        } else {
            SignCase::Negative
        }
    }
}

impl fmt::Display for SignCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SignCase::Positive => "positive",
            SignCase::Negative => "negative",
            SignCase::Zero => "zero",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum BoundWarning {
    /// Negative rate with `1 + hL <= 0`: the step is too large for the
    /// geometric-sum envelope to apply.
    NonPositiveAmplification { one_plus_hl: f64 },
}

impl fmt::Display for BoundWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundWarning::NonPositiveAmplification { one_plus_hl } => write!(
                f,
                "1 + hL = {one_plus_hl:e} is not positive; the step is too large for the bound to hold"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundModel {
    /// Growth rate `L`.
    pub rate: f64,
    /// Amplitude `C̃`.
    pub c_tilde: f64,
    pub sign_case: SignCase,
    pub h: f64,
    pub warnings: Vec<BoundWarning>,
}

impl BoundModel {
    pub fn new(rate: f64, c_tilde: f64, h: f64) -> Self {
        let sign_case = SignCase::of(rate);
        let mut warnings = Vec::new();
        if sign_case == SignCase::Negative && 1.0 + h * rate <= 0.0 {
            warnings.push(BoundWarning::NonPositiveAmplification {
                one_plus_hl: 1.0 + h * rate,
            });
        }
        BoundModel {
            rate,
            c_tilde: c_tilde.abs(),
            sign_case,
            h,
            warnings,
        }
    }

    /// Estimates `C̃` from a run's global errors and builds the model.
    ///
    /// The returned curve is `|C̃_i h / L|` per node, or `C̃_i` itself when
    /// the rate is zero.
    pub fn fit(deltas: &[f64], rate: f64, mesh: &Mesh) -> Result<(Self, CTildeEstimate)> {
        let h = mesh.h();
        if SignCase::of(rate) == SignCase::Zero {
            let estimate = estimate_c_tilde_zero(deltas, mesh)?;
            Ok((BoundModel::new(0.0, estimate.max, h), estimate))
        } else {
            let estimate = estimate_c_tilde(deltas, rate, mesh)?;
            Ok((
                BoundModel::new(rate, estimate.max * rate.abs() / h, h),
                estimate,
            ))
        }
    }

    /// `C̃ h / |L|`, the plateau of the envelope for `L ≪ 0`.
    pub fn scale(&self) -> f64 {
        match self.sign_case {
            SignCase::Zero => 0.0,
            _ => self.c_tilde * self.h / self.rate.abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CTildeEstimate {
    /// `None` where the node was excluded (always node 0).
    pub curve: Vec<Option<f64>>,
    pub max: f64,
}

/// Growth rate `L` for the envelope.
///
/// Per node the explicit rate is `f_y + (h/2) K_y` and the implicit rate is
/// `(f_y + (3h/2) K_y) / (1 − h f_y − (h²/2) K_y)`, both at `(x_i, w_i)`.
/// The result is the largest rate when any rate is positive and otherwise
/// minus the largest magnitude. Constant Jacobians reduce both to their
/// closed forms.
pub fn growth_rate(problem: &VideProblem, trajectory: &Trajectory, method: Method) -> Result<f64> {
    let h = trajectory.mesh.h();
    let mut max_rate = f64::NEG_INFINITY;
    let mut max_magnitude = 0.0f64;
    for (x, w) in trajectory.nodes() {
        let f_y = problem.f_y(x, w)?;
        let k_y = problem.kernel_y(x, w, x)?;
        let rate = match method {
            Method::Explicit => f_y + 0.5 * h * k_y,
            Method::Implicit => {
                let d = 1.0 - h * f_y - 0.5 * h * h * k_y;
                if d.abs() <= ZERO_RATE_TOL {
                    return Err(VideError::SingularDenominator { x, value: d });
                }
                (f_y + 1.5 * h * k_y) / d
            }
        };
        max_rate = max_rate.max(rate);
        max_magnitude = max_magnitude.max(rate.abs());
    }
    Ok(if max_rate > 0.0 {
        max_rate
    } else {
        -max_magnitude
    })
}

fn growth_factor(mesh: &Mesh, i: usize, rate: f64) -> f64 {
    ((mesh.node(i) - mesh.x0()) * rate).exp_m1()
}

/// Per-node `|C̃_i h / L| = |Δ_i| / |e^{(x_i − x_0)L} − 1|` and its maximum.
pub fn estimate_c_tilde(deltas: &[f64], rate: f64, mesh: &Mesh) -> Result<CTildeEstimate> {
    if deltas.len() > mesh.len() {
        return Err(VideError::LengthMismatch {
            expected: mesh.len(),
            found: deltas.len(),
        });
    }
    let curve: Vec<Option<f64>> = deltas
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let den = growth_factor(mesh, i, rate).abs();
            (i > 0 && den > DENOMINATOR_FLOOR).then(|| d.abs() / den)
        })
        .collect();
    let max = curve
        .iter()
        .flatten()
        .copied()
        .reduce(f64::max)
        .ok_or(VideError::DegenerateDenominator)?;
    Ok(CTildeEstimate { curve, max })
}

/// Zero-rate amplitude: `C̃_i = |Δ_i| / ((x_i − x_0) h)` and its maximum.
pub fn estimate_c_tilde_zero(deltas: &[f64], mesh: &Mesh) -> Result<CTildeEstimate> {
    let h = mesh.h();
    let curve: Vec<Option<f64>> = deltas
        .iter()
        .enumerate()
        .map(|(i, d)| (i > 0).then(|| d.abs() / ((mesh.node(i) - mesh.x0()) * h)))
        .collect();
    let max = curve
        .iter()
        .flatten()
        .copied()
        .reduce(f64::max)
        .ok_or(VideError::DegenerateDenominator)?;
    Ok(CTildeEstimate { curve, max })
}

/// Signed `Δ_i / (e^{(x_i − x_0)L} − 1)`; shares its zeros with `Δ_i`.
pub fn signed_c_curve(deltas: &[f64], rate: f64, mesh: &Mesh) -> Vec<Option<f64>> {
    deltas
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let den = growth_factor(mesh, i, rate);
            (i > 0 && den.abs() > DENOMINATOR_FLOOR).then(|| d / den)
        })
        .collect()
}

/// Envelope values `U_i` on every node of `mesh`; `U_0 = 0`.
pub fn error_bound(model: &BoundModel, mesh: &Mesh) -> Result<Vec<f64>> {
    if (model.h - mesh.h()).abs() > 1e-12 * mesh.h() {
        return Err(VideError::InvalidConfig(format!(
            "bound model built for h = {} applied to a mesh with h = {}",
            model.h,
            mesh.h()
        )));
    }
    let bound = |i: usize| match model.sign_case {
        SignCase::Zero => model.c_tilde * (mesh.node(i) - mesh.x0()) * model.h,
        _ => (model.scale() * growth_factor(mesh, i, model.rate)).abs(),
    };
    Ok((0..mesh.len()).map(bound).collect())
}
