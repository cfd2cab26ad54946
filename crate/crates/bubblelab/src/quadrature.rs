//! Gauss–Legendre quadrature on [0, 1] and small dense-algebra helpers.

use serde::Serialize;

use crate::error::{BubbleError, Result};

/// Gauss–Legendre rule mapped to [0, 1]. Nodes lie strictly inside the
/// interval and the rule integrates polynomials of degree ≤ 2Q−1 exactly.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureRule {
    /// Nodes in ascending order, all in (0, 1).
    pub nodes: Vec<f64>,
    /// Positive weights summing to one.
    pub weights: Vec<f64>,
    /// Number of nodes Q.
    pub order: usize,
}

impl QuadratureRule {
    /// ∫₀¹ f(y) dy.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&y, &w)| w * f(y))
            .sum()
    }

    /// ∫_{B₁} f(|x|) dx = 4π ∫₀¹ f(y) y² dy for a radial function.
    pub fn integrate_ball<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        4.0 * std::f64::consts::PI * self.integrate(|y| f(y) * y * y)
    }
}

/// Builds the Q-point Gauss–Legendre rule on [0, 1].
///
/// Nodes are the roots of P_Q found by Newton's method on the three-term
/// recurrence, started from the standard cosine approximation.
pub fn gauss_quadrature(q: usize) -> Result<QuadratureRule> {
    if q < 2 {
        return Err(BubbleError::field("Q", "quadrature order must be at least 2"));
    }
    let n = q as f64;
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    for i in 0..q.div_ceil(2) {
        // i-th largest root on [-1, 1]
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(q, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                let (_, d) = legendre_with_derivative(q, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map [-1, 1] -> [0, 1]
        nodes[q - 1 - i] = 0.5 * (1.0 + x);
        nodes[i] = 0.5 * (1.0 - x);
        weights[q - 1 - i] = 0.5 * w;
        weights[i] = 0.5 * w;
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        order: q,
    })
}

/// Value and derivative of the Legendre polynomial P_n at x ∈ (−1, 1).
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Tail Σ_{k>n} k^{-p} for p ≥ 2, by Euler–Maclaurin after explicit
/// summation up to a cut-off large enough for full double precision.
pub fn zeta_tail(p: u32, n: usize) -> f64 {
    let pf = p as f64;
    let cut = n.max(64 * (1 + 64 / p as usize)).max(n + 64);
    let mut s = 0.0;
    for k in (n + 1..=cut).rev() {
        s += (k as f64).powf(-pf);
    }
    // Euler–Maclaurin for Σ_{k>cut} k^{-p}
    let c = cut as f64;
    let tail = c.powf(1.0 - pf) / (pf - 1.0) - 0.5 * c.powf(-pf) + pf / 12.0 * c.powf(-pf - 1.0)
        - pf * (pf + 1.0) * (pf + 2.0) / 720.0 * c.powf(-pf - 3.0);
    s + tail
}

/// Riemann zeta at an even integer 2m for 1 ≤ m ≤ 6 (closed forms), other
/// integers p ≥ 2 by summation.
pub fn zeta(p: u32) -> f64 {
    use std::f64::consts::PI;
    match p {
        2 => PI * PI / 6.0,
        4 => PI.powi(4) / 90.0,
        6 => PI.powi(6) / 945.0,
        8 => PI.powi(8) / 9450.0,
        10 => PI.powi(10) / 93555.0,
        12 => 691.0 * PI.powi(12) / 638512875.0,
        _ => 1.0 + zeta_tail(p, 1),
    }
}
