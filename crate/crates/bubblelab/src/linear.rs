//! The truncated linear operator L_N acting on z = (ρ̃₂, R̃, Ṙ, θ₁…θ_N) and
//! its kernel/left-eigenvector identities.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::equilibrium::{derived_constants, EquilibriumState};
use crate::modal::ModalBasis;
use crate::quadrature::zeta_tail;

/// How the infinite mode sum is closed when truncating to N modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Closure {
    /// Entries exactly as in the infinite operator, cut at N modes. The
    /// density row uses the infinite-sum coefficient 3γρ†/R†.
    #[default]
    Printed,
    /// Density-row coefficient from the finite-N mass balance, so that the
    /// linearised gas mass is conserved exactly at every N.
    MassConsistent,
    /// One extra pseudo-mode (size N+4) whose coupling, decay and flux match
    /// the first two moments of the discarded tail Σ_{k>N}.
    ResidualMode,
}

/// Modal sequences (c, ω, λ) used to fill the operator, including the
/// pseudo-mode for [`Closure::ResidualMode`].
#[derive(Debug, Clone)]
pub struct ModalSequences {
    pub c: Vec<f64>,
    pub omega: Vec<f64>,
    pub lambda: Vec<f64>,
    /// Coefficient s multiplying Ṙ and the fluxes in the density row.
    pub s: f64,
}

/// Builds the modal sequences for a closure.
pub fn modal_sequences(eq: &EquilibriumState, basis: &ModalBasis, closure: Closure) -> ModalSequences {
    let gamma = eq.params.gamma;
    let (r, rho, kb) = (eq.r_star, eq.rho_star, eq.kappa_bar);
    let mut c = basis.c.clone();
    let mut omega = basis.omega.clone();
    let mut lambda = basis.lambda.clone();
    let t2 = zeta_tail(2, basis.n);
    let s = match closure {
        Closure::Printed => 3.0 * gamma * rho / r,
        Closure::MassConsistent => {
            let a = r / (3.0 * gamma * rho) + 2.0 * (gamma - 1.0) * r / (gamma * PI * PI * rho) * t2;
            1.0 / a
        }
        Closure::ResidualMode => {
            let t4 = zeta_tail(4, basis.n);
            let c_t = (8.0 * (gamma - 1.0).powi(2) / (PI * gamma * gamma) * t2).sqrt();
            let l_t = PI * PI * t2 / t4;
            let o_t = gamma * c_t * kb * l_t * r / ((gamma - 1.0) * 4.0 * PI * rho);
            c.push(c_t);
            omega.push(o_t);
            lambda.push(l_t);
            3.0 * gamma * rho / r
        }
    };
    ModalSequences { c, omega, lambda, s }
}

/// Dense L_N in the order (ρ̃₂, R̃, Ṙ, θ₁…θ_N) with the printed entries.
pub fn assemble_linear(eq: &EquilibriumState, basis: &ModalBasis) -> DMatrix<f64> {
    assemble_linear_with(eq, basis, Closure::Printed)
}

/// Dense L_N for a given closure.
pub fn assemble_linear_with(eq: &EquilibriumState, basis: &ModalBasis, closure: Closure) -> DMatrix<f64> {
    let seq = modal_sequences(eq, basis, closure);
    let dc = derived_constants(eq);
    let m = seq.c.len();
    let dim = m + 3;
    let s = seq.s;
    let mut l = DMatrix::zeros(dim, dim);
    l[(0, 2)] = -s;
    l[(1, 2)] = 1.0;
    l[(2, 0)] = eq.params.rt() / dc.c;
    l[(2, 1)] = dc.a / dc.c;
    l[(2, 2)] = -dc.b / dc.c;
    for j in 0..m {
        l[(0, 3 + j)] = seq.omega[j] * s;
    }
    for k in 0..m {
        l[(3 + k, 2)] = seq.c[k] * s;
        for j in 0..m {
            l[(3 + k, 3 + j)] = -seq.c[k] * seq.omega[j] * s;
        }
        l[(3 + k, 3 + k)] -= eq.kappa_bar * seq.lambda[k];
    }
    l
}

/// Right kernel vector U = (−A/(𝔎T∞), 1, 0, …, 0) of length `dim`.
pub fn right_kernel_vector(eq: &EquilibriumState, dim: usize) -> DVector<f64> {
    let dc = derived_constants(eq);
    let mut u = DVector::zeros(dim);
    u[0] = -dc.a / eq.params.rt();
    u[1] = 1.0;
    u
}

/// Left eigenvector Ũ = (4π/3, 4πρ†/R†, 0, γc_k/(γ−1)) for the first N modes
/// (γc_k/(γ−1) = g_k); Ũᵀz is the linearised gas mass divided by R†³.
pub fn left_kernel_vector(eq: &EquilibriumState, basis: &ModalBasis) -> DVector<f64> {
    let n = basis.n;
    let mut u = DVector::zeros(n + 3);
    u[0] = 4.0 * PI / 3.0;
    u[1] = 4.0 * PI * eq.rho_star / eq.r_star;
    let gamma = eq.params.gamma;
    for k in 0..n {
        u[3 + k] = gamma * basis.c[k] / (gamma - 1.0);
    }
    u
}

/// Relative cancellation of the left-eigenvector identity:
/// max_j |(ŨᵀL)_j| / Σ_i |Ũ_i L_ij| over columns with a nonzero scale.
pub fn left_residual(u: &DVector<f64>, l: &DMatrix<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..l.ncols() {
        let mut v = 0.0;
        let mut scale = 0.0;
        for i in 0..l.nrows() {
            v += u[i] * l[(i, j)];
            scale += (u[i] * l[(i, j)]).abs();
        }
        if scale > 0.0 {
            worst = worst.max(v.abs() / scale);
        }
    }
    worst
}
