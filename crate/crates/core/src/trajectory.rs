use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::VideError;
use crate::mesh::Mesh;
use crate::stepper::ImplicitSolveConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Explicit,
    Implicit,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Explicit => f.write_str("explicit"),
            Method::Implicit => f.write_str("implicit"),
        }
    }
}

impl FromStr for Method {
    type Err = VideError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "explicit" => Ok(Method::Explicit),
            "implicit" => Ok(Method::Implicit),
            other => Err(VideError::InvalidConfig(format!(
                "unknown method `{other}`"
            ))),
        }
    }
}

/// Outcome of solving for one step. Explicit steps report zero iterations.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct StepDiagnostics {
    pub iterations: usize,
    pub residual: f64,
}

/// Where an unstable run was cut off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Divergence {
    /// Index of the first node whose value exceeded the cutoff.
    pub step: usize,
    pub magnitude: f64,
}

/// Approximate solution values `w_i` on a mesh.
///
/// `w` has `mesh.len()` entries unless the run diverged, in which case it
/// holds every value computed before the cutoff and `divergence` is set.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub mesh: Mesh,
    pub w: Vec<f64>,
    pub method: Method,
    /// One record per completed step; `step_diagnostics[i]` describes the
    /// step producing `w[i + 1]`.
    pub step_diagnostics: Vec<StepDiagnostics>,
    pub divergence: Option<Divergence>,
    pub solve_config: ImplicitSolveConfig,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn diverged(&self) -> bool {
        self.divergence.is_some()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.w
            .iter()
            .enumerate()
            .map(move |(i, &w)| (self.mesh.node(i), w))
    }

    pub fn max_abs(&self) -> f64 {
        self.w.iter().fold(0.0f64, |m, w| m.max(w.abs()))
    }
}
