//! Error analysis for computed trajectories.
//!
//! Notation follows the usual one-step conventions: `Δ_i = w_i − y(x_i)` is
//! the global error, `ε_{i+1}` the local error committed by one step seeded
//! with exact values, and `α_i` the factor carrying `Δ_i` into `Δ_{i+1}`.
//! Jacobians are always evaluated at computed values `(x_i, w_i)`, which is
//! exact for problems linear in `y`.

mod bound;
mod global;
mod order;
mod propagation;

pub use bound::{
    error_bound, estimate_c_tilde, estimate_c_tilde_zero, growth_rate, signed_c_curve, BoundModel,
    BoundWarning, CTildeEstimate, SignCase, ZERO_RATE_TOL,
};
pub use global::{
    global_errors, global_errors_against_reference, measure_global_errors, reference_run,
    ErrorSource, REFERENCE_REFINEMENT,
};
pub use order::{observed_order, order_from_errors, ZERO_ERROR_TOL};
pub use propagation::{
    analyze, direct_local_errors, propagation_coefficient_explicit,
    propagation_coefficient_implicit, propagation_residual, recover_local_errors, ErrorReport,
};
