//! Built-in problems: the linear test equation and a few manufactured
//! problems that each exercise one code path of the steppers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, VideError};
use crate::problem::VideProblem;

/// Coefficients of `y' = λ(y − 1) + γ ∫_0^x y(t) dt`, `y(0) = 2`.
///
/// Negative coefficients give the stiff regime; positive ones are accepted
/// as well.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestEquationParams {
    pub lambda: f64,
    pub gamma: f64,
}

impl TestEquationParams {
    pub fn new(lambda: f64, gamma: f64) -> Self {
        TestEquationParams { lambda, gamma }
    }

    /// `λ² + 4γ`; non-negative means real characteristic roots.
    pub fn discriminant(&self) -> f64 {
        self.lambda * self.lambda + 4.0 * self.gamma
    }

    /// Real characteristic roots `(m₁, m₂)` of `m² = λm + γ`, if any.
    pub fn real_roots(&self) -> Option<(f64, f64)> {
        let d = self.discriminant();
        (d >= 0.0).then(|| {
            let s = d.sqrt();
            (0.5 * (self.lambda - s), 0.5 * (self.lambda + s))
        })
    }
}

pub const TEST_EQUATION_Y0: f64 = 2.0;

pub fn test_equation_exact(params: TestEquationParams, x: f64) -> f64 {
    match params.real_roots() {
        Some((m1, m2)) => (m1 * x).exp() + (m2 * x).exp(),
        None => {
            let omega = 0.5 * params.discriminant().abs().sqrt();
            2.0 * (0.5 * params.lambda * x).exp() * (omega * x).cos()
        }
    }
}

pub fn test_equation(params: TestEquationParams) -> VideProblem {
    let TestEquationParams { lambda, gamma } = params;
    VideProblem::new(
        0.0,
        TEST_EQUATION_Y0,
        move |_, y| lambda * (y - 1.0),
        move |_, y, _| gamma * y,
    )
    .with_jacobians(move |_, _| lambda, move |_, _, _| gamma)
    .with_exact(move |x| test_equation_exact(params, x))
    .expect("test equation solution starts at 2")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ManufacturedId {
    /// `y' = −y`
    PureOde,
    /// `y' = ∫ 1 dt`
    ConstantKernel,
    /// `y' = −y − ∫ y³ dt`, no closed form
    CubicKernel,
}

pub fn manufactured_problem(id: ManufacturedId, y0: f64) -> VideProblem {
    match id {
        ManufacturedId::PureOde => VideProblem::new(0.0, y0, |_, y| -y, |_, _, _| 0.0)
            .with_jacobians(|_, _| -1.0, |_, _, _| 0.0)
            .with_exact(move |x| y0 * (-x).exp())
            .expect("y0 e^{-x} starts at y0"),
        ManufacturedId::ConstantKernel => VideProblem::new(0.0, y0, |_, _| 0.0, |_, _, _| 1.0)
            .with_jacobians(|_, _| 0.0, |_, _, _| 0.0)
            .with_exact(move |x| y0 + 0.5 * x * x)
            .expect("y0 + x²/2 starts at y0"),
        ManufacturedId::CubicKernel => VideProblem::new(0.0, y0, |_, y| -y, |_, y, _| -y * y * y)
            .with_jacobians(|_, _| -1.0, |_, y, _| -3.0 * y * y),
    }
}

/// Problem identifiers as accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemId {
    TestEquation,
    PureOde,
    ConstantKernel,
    CubicKernel,
}

impl ProblemId {
    pub const ALL: [ProblemId; 4] = [
        ProblemId::TestEquation,
        ProblemId::PureOde,
        ProblemId::ConstantKernel,
        ProblemId::CubicKernel,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ProblemId::TestEquation => "test-equation",
            ProblemId::PureOde => "pure-ode",
            ProblemId::ConstantKernel => "constant-kernel",
            ProblemId::CubicKernel => "cubic-kernel",
        }
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProblemId {
    type Err = VideError;

    fn from_str(s: &str) -> Result<Self> {
        ProblemId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| VideError::UnknownProblem(s.to_string()))
    }
}

/// A problem id together with its numeric parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub id: ProblemId,
    pub params: TestEquationParams,
    /// Initial value for the manufactured problems. The test equation
    /// always starts from 2.
    pub y0: Option<f64>,
}

impl ProblemSpec {
    pub fn test_equation(lambda: f64, gamma: f64) -> Self {
        ProblemSpec {
            id: ProblemId::TestEquation,
            params: TestEquationParams::new(lambda, gamma),
            y0: None,
        }
    }

    pub fn manufactured(id: ManufacturedId, y0: f64) -> Self {
        let id = match id {
            ManufacturedId::PureOde => ProblemId::PureOde,
            ManufacturedId::ConstantKernel => ProblemId::ConstantKernel,
            ManufacturedId::CubicKernel => ProblemId::CubicKernel,
        };
        ProblemSpec {
            id,
            params: TestEquationParams::new(-1.0, -2.0),
            y0: Some(y0),
        }
    }

    pub fn build(&self) -> Result<VideProblem> {
        let manufactured = |id| Ok(manufactured_problem(id, self.y0.unwrap_or(1.0)));
        match self.id {
            ProblemId::TestEquation => match self.y0 {
                Some(y0) if y0 != TEST_EQUATION_Y0 => Err(VideError::InvalidConfig(format!(
                    "the test equation starts from y(0) = 2, got y0 = {y0}"
                ))),
                _ => Ok(test_equation(self.params)),
            },
            ProblemId::PureOde => manufactured(ManufacturedId::PureOde),
            ProblemId::ConstantKernel => manufactured(ManufacturedId::ConstantKernel),
            ProblemId::CubicKernel => manufactured(ManufacturedId::CubicKernel),
        }
    }
}
