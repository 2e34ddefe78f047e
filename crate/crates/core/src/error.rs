use thiserror::Error;

pub type Result<T> = std::result::Result<T, VideError>;

#[derive(Error, Debug)]
pub enum VideError {
    #[error("step size must be positive, got {h}")]
    NonPositiveStep { h: f64 },
    #[error("step size {h} does not tile the interval [{x0}, {xf}]")]
    NonTilingStep { x0: f64, xf: f64, h: f64 },
    #[error("empty integration interval [{x0}, {xf}]")]
    EmptyInterval { x0: f64, xf: f64 },
    #[error("index out of range: outer {outer}, last {last}, available {available}")]
    IndexOutOfRange {
        outer: usize,
        last: usize,
        available: usize,
    },
    #[error("{what} evaluated to NaN at step {step} (x = {x})")]
    StepEvaluation {
        step: usize,
        what: &'static str,
        x: f64,
    },
    #[error("implicit solve did not converge at step {step} after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        step: usize,
        iterations: usize,
        residual: f64,
    },
    #[error("singular Newton denominator {value:e} at step {step}")]
    SingularJacobian { step: usize, value: f64 },
    #[error("problem does not provide the Jacobians f_y and K_y")]
    MissingJacobian,
    #[error("no exact solution available for this problem")]
    MissingExact,
    #[error("exact solution gives {exact} at x0 but y0 = {y0}")]
    ExactMismatch { exact: f64, y0: f64 },
    #[error("singular propagation denominator {value:e} at x = {x}")]
    SingularDenominator { x: f64, value: f64 },
    #[error("every node was excluded from the amplitude estimate")]
    DegenerateDenominator,
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("global error {value:e} at h = {h} is too small to define an order")]
    ZeroError { h: f64, value: f64 },
    #[error("unknown problem id `{0}`")]
    UnknownProblem(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl VideError {
    /// True for failures of the numerical method itself, as opposed to bad
    /// input or I/O.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            VideError::StepEvaluation { .. }
                | VideError::NoConvergence { .. }
                | VideError::SingularJacobian { .. }
                | VideError::SingularDenominator { .. }
                | VideError::DegenerateDenominator
                | VideError::ZeroError { .. }
        )
    }

    /// Step index carried by stepping failures.
    pub fn step(&self) -> Option<usize> {
        match self {
            VideError::StepEvaluation { step, .. }
            | VideError::NoConvergence { step, .. }
            | VideError::SingularJacobian { step, .. } => Some(*step),
            _ => None,
        }
    }
}
