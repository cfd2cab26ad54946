//! Radial Dirichlet eigenfunctions of the unit ball, projections onto them,
//! and the fixed modal coefficient sequences of the Galerkin system.

use std::f64::consts::PI;

use serde::Serialize;

use crate::equilibrium::EquilibriumState;
use crate::error::{BubbleError, Result};
use crate::quadrature::{gauss_quadrature, zeta_tail, QuadratureRule};

/// Below this value of x = jπy the removable singularity at the centre is
/// evaluated from its Taylor expansion.
const SERIES_SWITCH: f64 = 1e-2;

/// Ξ_j(y) = sin(jπy)/(√(2π)y), with Ξ_j(0) = j√(π/2).
pub fn eigenfunction(j: usize, y: f64) -> f64 {
    let k = j as f64 * PI;
    let x = k * y;
    if x.abs() < SERIES_SWITCH {
        let x2 = x * x;
        k / (2.0 * PI).sqrt() * (1.0 - x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0)))
    } else {
        x.sin() / ((2.0 * PI).sqrt() * y)
    }
}

/// Radial derivative ∂_yΞ_j(y).
pub fn eigenfunction_dy(j: usize, y: f64) -> f64 {
    let k = j as f64 * PI;
    let x = k * y;
    if x.abs() < SERIES_SWITCH {
        let x2 = x * x;
        // d/dy of k(1 − x²/6 + x⁴/120 − x⁶/5040)/√(2π)
        k * k / (2.0 * PI).sqrt() * x * (-1.0 / 3.0 + x2 / 30.0 - x2 * x2 / 840.0)
    } else {
        (x * x.cos() - x.sin()) / ((2.0 * PI).sqrt() * y * y)
    }
}

/// ∂_yΞ_j(1) = √(π/2)(−1)^j j.
pub fn boundary_slope(j: usize) -> f64 {
    sign(j) * (PI / 2.0).sqrt() * j as f64
}

/// (−1)^j.
fn sign(j: usize) -> f64 {
    if j % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Mean g_j = ∫_{B₁}Ξ_j dx = 2√2(−1)^{j−1}/(√π j).
pub fn eigenfunction_integral(j: usize) -> f64 {
    -sign(j) * 2.0 * 2f64.sqrt() / (PI.sqrt() * j as f64)
}

/// Coupling c_k = (1 − 1/γ)g_k = (−1)^{k−1}2^{3/2}(γ−1)/(√πγk).
pub fn coupling(k: usize, gamma: f64) -> f64 {
    (1.0 - 1.0 / gamma) * eigenfunction_integral(k)
}

/// Σ_{k>n} c_k² = (8(γ−1)²/(πγ²)) Σ_{k>n} k⁻².
pub fn coupling_square_tail(n: usize, gamma: f64) -> f64 {
    8.0 * (gamma - 1.0).powi(2) / (PI * gamma * gamma) * zeta_tail(2, n)
}

/// Limit Σ_{k≥1} c_k² = 4(γ−1)²π/(3γ²).
pub fn coupling_square_sum(gamma: f64) -> f64 {
    4.0 * (gamma - 1.0).powi(2) * PI / (3.0 * gamma * gamma)
}

/// Truncated Galerkin basis with its coefficient sequences and tabulated
/// values on a Gauss–Legendre grid.
#[derive(Debug, Clone, Serialize)]
pub struct ModalBasis {
    /// Truncation order N.
    pub n: usize,
    /// λ_j = (jπ)².
    pub lambda: Vec<f64>,
    /// c_k = (−1)^{k−1}2^{3/2}(γ−1)/(√πγk).
    pub c: Vec<f64>,
    /// ω_j = −(R†κ̄/ρ†)√(π/2)(−1)^j j.
    pub omega: Vec<f64>,
    /// g_j = ∫_{B₁}Ξ_j dx.
    pub g: Vec<f64>,
    /// Quadrature rule on [0, 1].
    pub quadrature: QuadratureRule,
    /// Ball weights 4π w_q y_q², so that Σ_q ball_weights[q] f(y_q) ≈ ∫_{B₁} f.
    #[serde(skip)]
    pub ball_weights: Vec<f64>,
    /// Ξ_j(y_q), row-major by mode (index (j−1)·Q + q).
    #[serde(skip)]
    pub xi: Vec<f64>,
    /// ∂_yΞ_j(y_q), same layout as `xi`.
    #[serde(skip)]
    pub dxi: Vec<f64>,
}

impl ModalBasis {
    /// Basis with the default quadrature order Q = 4N.
    pub fn new(eq: &EquilibriumState, n: usize) -> Result<Self> {
        Self::with_quadrature(eq, n, 4 * n)
    }

    /// Basis with an explicit quadrature order (must be at least 2N).
    pub fn with_quadrature(eq: &EquilibriumState, n: usize, q: usize) -> Result<Self> {
        if n == 0 {
            return Err(BubbleError::field("N", "truncation order must be at least 1"));
        }
        if q < 2 * n {
            return Err(BubbleError::field(
                "Q",
                format!("quadrature order {q} below 2N = {} (aliasing)", 2 * n),
            ));
        }
        let quadrature = gauss_quadrature(q)?;
        let gamma = eq.params.gamma;
        let scale = eq.r_star * eq.kappa_bar / eq.rho_star;
        let lambda = (1..=n).map(|j| (j as f64 * PI).powi(2)).collect();
        let c = (1..=n).map(|k| coupling(k, gamma)).collect();
        let omega = (1..=n).map(|j| -scale * boundary_slope(j)).collect();
        let g = (1..=n).map(eigenfunction_integral).collect();
        let ball_weights = quadrature
            .nodes
            .iter()
            .zip(&quadrature.weights)
            .map(|(&y, &w)| 4.0 * PI * w * y * y)
            .collect();
        let mut xi = Vec::with_capacity(n * q);
        let mut dxi = Vec::with_capacity(n * q);
        for j in 1..=n {
            for &y in &quadrature.nodes {
                xi.push(eigenfunction(j, y));
                dxi.push(eigenfunction_dy(j, y));
            }
        }
        Ok(ModalBasis {
            n,
            lambda,
            c,
            omega,
            g,
            quadrature,
            ball_weights,
            xi,
            dxi,
        })
    }

    /// Number of quadrature nodes.
    pub fn q(&self) -> usize {
        self.quadrature.order
    }

    /// Tabulated Ξ_j on the grid (j is 1-based).
    pub fn xi_row(&self, j: usize) -> &[f64] {
        let q = self.q();
        &self.xi[(j - 1) * q..j * q]
    }

    /// Tabulated ∂_yΞ_j on the grid (j is 1-based).
    pub fn dxi_row(&self, j: usize) -> &[f64] {
        let q = self.q();
        &self.dxi[(j - 1) * q..j * q]
    }

    /// θ_j = ∫_{B₁} f Ξ_j dx for j = 1…N by quadrature.
    pub fn project<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        let values: Vec<f64> = self.quadrature.nodes.iter().map(|&y| f(y)).collect();
        self.project_values(&values)
    }

    /// Projection of values already tabulated on the quadrature nodes.
    pub fn project_values(&self, values: &[f64]) -> Vec<f64> {
        let wf: Vec<f64> = values
            .iter()
            .zip(&self.ball_weights)
            .map(|(v, w)| v * w)
            .collect();
        (1..=self.n)
            .map(|j| dot(self.xi_row(j), &wf))
            .collect()
    }

    /// Σ θ_j Ξ_j(y) at an arbitrary radius.
    pub fn reconstruct(&self, theta: &[f64], y: f64) -> f64 {
        theta
            .iter()
            .enumerate()
            .map(|(i, t)| t * eigenfunction(i + 1, y))
            .sum()
    }

    /// Σ θ_j ∂_yΞ_j(y) at an arbitrary radius.
    pub fn reconstruct_dy(&self, theta: &[f64], y: f64) -> f64 {
        theta
            .iter()
            .enumerate()
            .map(|(i, t)| t * eigenfunction_dy(i + 1, y))
            .sum()
    }

    /// Values of Σθ_jΞ_j, Σθ_j∂_yΞ_j and Σθ_jλ_jΞ_j (= −Δ of the sum) on the
    /// quadrature nodes.
    pub fn grid_fields(&self, theta: &[f64]) -> GridFields {
        let q = self.q();
        let mut f = vec![0.0; q];
        let mut df = vec![0.0; q];
        let mut lap = vec![0.0; q];
        for (i, &t) in theta.iter().enumerate().take(self.n) {
            if t == 0.0 {
                continue;
            }
            let j = i + 1;
            let tl = t * self.lambda[i];
            for (k, (&x, &dx)) in self.xi_row(j).iter().zip(self.dxi_row(j)).enumerate() {
                f[k] += t * x;
                df[k] += t * dx;
                lap[k] -= tl * x;
            }
        }
        GridFields { f, df, lap }
    }

    /// ∂_yρ̃₁(1) = Σθ_j√(π/2)(−1)^j j, optionally with Cesàro (Fejér) damping
    /// (1 − j/(N+1)) for slowly decaying coefficients.
    pub fn boundary_flux(&self, theta: &[f64], cesaro: bool) -> f64 {
        boundary_flux(theta, cesaro)
    }

    /// Gram matrix G_ij = ∫_{B₁}Ξ_iΞ_j dx by quadrature (row-major N×N).
    pub fn gram(&self) -> Vec<f64> {
        let n = self.n;
        let mut g = vec![0.0; n * n];
        for i in 1..=n {
            let wi: Vec<f64> = self
                .xi_row(i)
                .iter()
                .zip(&self.ball_weights)
                .map(|(x, w)| x * w)
                .collect();
            for j in i..=n {
                let v = dot(&wi, self.xi_row(j));
                g[(i - 1) * n + (j - 1)] = v;
                g[(j - 1) * n + (i - 1)] = v;
            }
        }
        g
    }
}

/// Field values on the quadrature nodes.
#[derive(Debug, Clone)]
pub struct GridFields {
    /// Σθ_jΞ_j.
    pub f: Vec<f64>,
    /// Σθ_j∂_yΞ_j.
    pub df: Vec<f64>,
    /// ΔΣθ_jΞ_j = −Σθ_jλ_jΞ_j.
    pub lap: Vec<f64>,
}

/// ∂_yρ̃₁(1) = Σθ_j√(π/2)(−1)^j j, optionally Cesàro-damped.
pub fn boundary_flux(theta: &[f64], cesaro: bool) -> f64 {
    let n = theta.len() as f64;
    theta
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let j = i + 1;
            let damp = if cesaro { 1.0 - j as f64 / (n + 1.0) } else { 1.0 };
            damp * t * boundary_slope(j)
        })
        .sum()
}

/// Euclidean dot product.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
