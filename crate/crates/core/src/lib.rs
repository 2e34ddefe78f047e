//! Solvers and error analysis for first-order Volterra integro-differential
//! equations
//!
//! ```text
//! y'(x) = f(x, y) + ∫_{x0}^{x} K(x, y(t), t) dt,    y(x0) = y0
//! ```
//!
//! Two fixed-step schemes are provided: an explicit Euler step paired with a
//! composite trapezium history sum, and its implicit counterpart which solves
//! a scalar nonlinear equation per step. The [`analysis`] module measures
//! global and local errors, evaluates the per-step propagation coefficients,
//! builds the exponential global-error envelope and estimates observed
//! convergence orders. [`experiments`] wires these together into
//! reproducible studies that emit [`table::ResultTable`]s.

pub mod analysis;
pub mod error;
pub mod experiments;
pub mod mesh;
pub mod problem;
pub mod problems;
pub mod stepper;
pub mod table;
pub mod trajectory;

pub use error::{Result, VideError};
pub use mesh::{make_mesh, Mesh};
pub use problem::VideProblem;
pub use stepper::{integrate, ImplicitSolveConfig, SolveStrategy};
pub use trajectory::{Divergence, Method, StepDiagnostics, Trajectory};
