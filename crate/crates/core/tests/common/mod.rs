//! Test-only oracles, independent of the library's stepping code.
#![allow(dead_code)]

use videstep::VideProblem;

/// Five-point Gauss-Legendre rule on [-1, 1].
const GL_NODES: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
    0.236_926_885_056_189_1,
];

/// Composite five-point Gauss-Legendre quadrature of `g` over `[a, b]`.
pub fn gauss_legendre(g: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let width = (b - a) / panels as f64;
    (0..panels)
        .map(|p| {
            let mid = a + (p as f64 + 0.5) * width;
            let half = 0.5 * width;
            GL_NODES
                .iter()
                .zip(GL_WEIGHTS)
                .map(|(t, wt)| wt * g(mid + half * t))
                .sum::<f64>()
                * half
        })
        .sum()
}

/// Fourth-order central difference.
pub fn derivative(y: impl Fn(f64) -> f64, x: f64, delta: f64) -> f64 {
    (-y(x + 2.0 * delta) + 8.0 * y(x + delta) - 8.0 * y(x - delta) + y(x - 2.0 * delta))
        / (12.0 * delta)
}

/// `y'(x) − f(x, y(x)) − ∫_{x0}^{x} K(x, y(t), t) dt` for the problem's
/// exact solution.
pub fn ide_residual(problem: &VideProblem, x: f64) -> f64 {
    let y = |s: f64| problem.exact(s).expect("exact solution");
    let dy = derivative(y, x, 1e-4);
    let memory = gauss_legendre(|t| problem.kernel(x, y(t), t), problem.x0(), x, 400);
    dy - problem.f(x, y(x)) - memory
}

/// Forward Euler for `y' = f(x, y)`.
pub fn forward_euler(f: impl Fn(f64, f64) -> f64, y0: f64, h: f64, n: usize) -> Vec<f64> {
    let mut w = vec![y0];
    for i in 0..n {
        let x = i as f64 * h;
        w.push(w[i] + h * f(x, w[i]));
    }
    w
}

/// One backward Euler step for `y' = f(x, y)` from `w` at `x` to `x + h`,
/// solved by bisection on `u − w − h f(x + h, u)`, which must change sign
/// on `[lo, hi]`.
pub fn backward_euler_step(
    f: impl Fn(f64, f64) -> f64,
    x: f64,
    w: f64,
    h: f64,
    lo: f64,
    hi: f64,
) -> f64 {
    let g = |u: f64| u - w - h * f(x + h, u);
    let (mut a, mut b) = (lo, hi);
    assert!(g(a) * g(b) <= 0.0, "bracket does not contain the root");
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if g(a) * g(m) <= 0.0 {
            b = m;
        } else {
            a = m;
        }
    }
    0.5 * (a + b)
}

/// `y' = −y − γ(1 − e^{−3x})/3 + γ ∫_0^x y(t)³ dt` with solution `e^{−x}`.
pub fn cubic_with_exact(gamma: f64) -> VideProblem {
    VideProblem::new(
        0.0,
        1.0,
        move |x, y| -y - gamma * (1.0 - (-3.0 * x).exp()) / 3.0,
        move |_, y, _| gamma * y * y * y,
    )
    .with_jacobians(|_, _| -1.0, move |_, y, _| 3.0 * gamma * y * y)
    .with_exact(|x| (-x).exp())
    .unwrap()
}

pub fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

pub fn sign_changes(values: &[f64]) -> usize {
    let signs: Vec<f64> = values
        .iter()
        .filter(|v| **v != 0.0)
        .map(|v| v.signum())
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}
