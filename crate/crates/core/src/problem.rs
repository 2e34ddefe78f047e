use std::fmt;
use std::sync::Arc;

use crate::error::{Result, VideError};

pub type RhsFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type KernelFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;
pub type SolutionFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

const EXACT_START_TOL: f64 = 1e-12;

/// `y'(x) = f(x, y) + ∫_{x0}^{x} K(x, y(t), t) dt` with `y(x0) = y0`.
///
/// The kernel is called as `kernel(x, y, t)`: outer abscissa, state value at
/// the inner abscissa, inner abscissa.
#[derive(Clone)]
pub struct VideProblem {
    f: RhsFn,
    kernel: KernelFn,
    f_y: Option<RhsFn>,
    kernel_y: Option<KernelFn>,
    x0: f64,
    y0: f64,
    exact: Option<SolutionFn>,
}

impl VideProblem {
    pub fn new<F, K>(x0: f64, y0: f64, f: F, kernel: K) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        K: Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    {
        VideProblem {
            f: Arc::new(f),
            kernel: Arc::new(kernel),
            f_y: None,
            kernel_y: None,
            x0,
            y0,
            exact: None,
        }
    }

    /// Attach `∂f/∂y` and `∂K/∂y`.
    pub fn with_jacobians<F, K>(mut self, f_y: F, kernel_y: K) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        K: Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    {
        self.f_y = Some(Arc::new(f_y));
        self.kernel_y = Some(Arc::new(kernel_y));
        self
    }

    /// Attach an analytic solution. It must reproduce `y0` at `x0`.
    pub fn with_exact<S>(mut self, exact: S) -> Result<Self>
    where
        S: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let start = exact(self.x0);
        if (start - self.y0).abs() > EXACT_START_TOL * self.y0.abs().max(1.0) {
            return Err(VideError::ExactMismatch {
                exact: start,
                y0: self.y0,
            });
        }
        self.exact = Some(Arc::new(exact));
        Ok(self)
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn y0(&self) -> f64 {
        self.y0
    }

    pub fn f(&self, x: f64, y: f64) -> f64 {
        (self.f)(x, y)
    }

    pub fn kernel(&self, x: f64, y: f64, t: f64) -> f64 {
        (self.kernel)(x, y, t)
    }

    pub fn has_jacobians(&self) -> bool {
        self.f_y.is_some() && self.kernel_y.is_some()
    }

    pub fn f_y(&self, x: f64, y: f64) -> Result<f64> {
        self.f_y
            .as_ref()
            .map(|g| g(x, y))
            .ok_or(VideError::MissingJacobian)
    }

    pub fn kernel_y(&self, x: f64, y: f64, t: f64) -> Result<f64> {
        self.kernel_y
            .as_ref()
            .map(|g| g(x, y, t))
            .ok_or(VideError::MissingJacobian)
    }

    pub fn has_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn exact(&self, x: f64) -> Option<f64> {
        self.exact.as_ref().map(|y| y(x))
    }
}

impl fmt::Debug for VideProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VideProblem")
            .field("x0", &self.x0)
            .field("y0", &self.y0)
            .field("jacobians", &self.has_jacobians())
            .field("exact", &self.has_exact())
            .finish_non_exhaustive()
    }
}
