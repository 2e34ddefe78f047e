use serde::Serialize;

use crate::error::{Result, VideError};

const TILING_TOL: f64 = 1e-9;

/// Uniform grid `x0, x0 + h, ..., xf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mesh {
    x0: f64,
    xf: f64,
    h: f64,
    n_steps: usize,
}

impl Mesh {
    pub fn new(x0: f64, xf: f64, h: f64) -> Result<Self> {
        if h.is_nan() || h <= 0.0 || !h.is_finite() {
            return Err(VideError::NonPositiveStep { h });
        }
        if !x0.is_finite() || !xf.is_finite() || xf <= x0 {
            return Err(VideError::EmptyInterval { x0, xf });
        }
        let steps = ((xf - x0) / h).round();
        if steps < 1.0 || (x0 + steps * h - xf).abs() > TILING_TOL * xf.abs().max(1.0) {
            return Err(VideError::NonTilingStep { x0, xf, h });
        }
        Ok(Mesh {
            x0,
            xf,
            h,
            n_steps: steps as usize,
        })
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn xf(&self) -> f64 {
        self.xf
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Number of nodes, `n_steps + 1`.
    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `x0 + i·h`, computed directly rather than by accumulation.
    pub fn node(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.h
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n_steps).map(move |i| self.node(i))
    }

    /// Same interval with the step divided by `factor`.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Mesh::new(self.x0, self.xf, self.h / factor as f64)
    }
}

pub fn make_mesh(x0: f64, xf: f64, h: f64) -> Result<Mesh> {
    Mesh::new(x0, xf, h)
}
