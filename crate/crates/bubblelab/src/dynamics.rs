//! The truncated nonlinear Galerkin system ż = Lz + N¹(z)ż + N⁰(z).
//!
//! Internally the system is written in mass-matrix form 𝕄(z)ż = G(z), where
//! 𝕄 and G come straight from the fixed-domain equations projected on the
//! eigenfunction basis. With 𝕄₀ = 𝕄(0):
//!
//! * L = 𝕄₀⁻¹ DG(0),
//! * N⁰(z) = 𝕄₀⁻¹ G(z) − Lz,
//! * N¹(z) = −𝕄₀⁻¹ (𝕄(z) − 𝕄₀),
//!
//! so that (I − N¹(z)) ż = Lz + N⁰(z) reproduces 𝕄(z)ż = G(z) exactly.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::equilibrium::{derived_constants, gap_ratio, DerivedConstants, EquilibriumState};
use crate::error::{BubbleError, Result};
use crate::linear::{assemble_linear_with, Closure};
use crate::modal::{boundary_flux, dot, eigenfunction, ModalBasis};

/// Lower density bound of the validity region, as a fraction of ρ†.
pub const VALIDITY_DENSITY_FRACTION: f64 = 0.1;
/// Lower radius bound of the validity region, as a fraction of R†.
pub const VALIDITY_RADIUS_FRACTION: f64 = 0.1;

/// Truncated state z = (ρ̃₂, R̃, Ṙ, θ₁…θ_N).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModalState {
    /// Interface density perturbation ρ̃₂ = ρ̄(1) − ρ†.
    pub rho2: f64,
    /// Radius perturbation R − R†.
    pub delta_r: f64,
    /// Interface velocity Ṙ.
    pub d_r: f64,
    /// Modal coefficients of the interior perturbation ρ̃₁.
    pub theta: Vec<f64>,
}

impl ModalState {
    /// The equilibrium itself (z = 0).
    pub fn zero(n: usize) -> Self {
        ModalState {
            rho2: 0.0,
            delta_r: 0.0,
            d_r: 0.0,
            theta: vec![0.0; n],
        }
    }

    /// Flattens into (ρ̃₂, R̃, Ṙ, θ₁…θ_N).
    pub fn to_vector(&self) -> DVector<f64> {
        let mut v = DVector::zeros(self.theta.len() + 3);
        v[0] = self.rho2;
        v[1] = self.delta_r;
        v[2] = self.d_r;
        for (i, t) in self.theta.iter().enumerate() {
            v[3 + i] = *t;
        }
        v
    }

    /// Inverse of [`ModalState::to_vector`].
    pub fn from_vector(v: &DVector<f64>) -> Self {
        ModalState {
            rho2: v[0],
            delta_r: v[1],
            d_r: v[2],
            theta: v.iter().skip(3).copied().collect(),
        }
    }

    /// Euclidean norm ‖z‖.
    pub fn norm(&self) -> f64 {
        self.to_vector().norm()
    }

    /// Reconstructed density ρ̄(y) = ρ† + ρ̃₂ + Σθ_jΞ_j(y).
    pub fn density(&self, eq: &EquilibriumState, y: f64) -> f64 {
        eq.rho_star
            + self.rho2
            + self
                .theta
                .iter()
                .enumerate()
                .map(|(i, t)| t * eigenfunction(i + 1, y))
                .sum::<f64>()
    }

    /// Gas mass R³∫_{B₁}ρ̄ = R³((4π/3)ρ̄(1) + Σg_jθ_j).
    pub fn mass(&self, eq: &EquilibriumState, basis: &ModalBasis) -> f64 {
        let r = eq.r_star + self.delta_r;
        r.powi(3) * mean_density_integral(eq, basis, self.rho2, &self.theta)
    }
}

/// ∫_{B₁}ρ̄ = (4π/3)(ρ† + ρ̃₂) + Σg_jθ_j.
fn mean_density_integral(eq: &EquilibriumState, basis: &ModalBasis, rho2: f64, theta: &[f64]) -> f64 {
    4.0 * PI / 3.0 * (eq.rho_star + rho2) + dot(&basis.g, theta)
}

/// Which Galerkin system is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formulation {
    /// Density row from conservation of the truncated gas mass, with the
    /// convective term (Ṙ/R) y∂_yρ̄ of the moving-domain transformation in
    /// the interior equation. Conserves mass exactly; its linearisation is
    /// the [`Closure::MassConsistent`] operator.
    #[default]
    MassConsistent,
    /// Density row from the interface kinematic condition and interior
    /// equation without the convective term; linearises to the printed L_N.
    Printed,
}

impl Formulation {
    /// Closure of L_N that equals the Jacobian of this formulation at 0.
    pub fn closure(&self) -> Closure {
        match self {
            Formulation::MassConsistent => Closure::MassConsistent,
            Formulation::Printed => Closure::Printed,
        }
    }
}

/// Nonlinear remainder of the right-hand side.
#[derive(Debug, Clone)]
pub struct NonlinearTerms {
    /// N⁰(z).
    pub n0: DVector<f64>,
    /// N¹(z) as a dense matrix acting on ż.
    pub n1: DMatrix<f64>,
}

/// Everything that depends on z in 𝕄(z)ż = G(z).
#[derive(Debug, Clone)]
struct Pieces {
    /// G(z).
    g: DVector<f64>,
    /// Column 0 of 𝕄(z) − 𝕄₀ (coefficient of ρ̃₂′ in each row).
    d_col0: DVector<f64>,
    /// Entry (2,2) of 𝕄(z) − 𝕄₀.
    d22: f64,
}

/// Galerkin system bound to an equilibrium and a basis.
#[derive(Debug, Clone)]
pub struct GalerkinSystem {
    pub eq: EquilibriumState,
    pub basis: ModalBasis,
    pub formulation: Formulation,
    /// Linear operator L = 𝕄₀⁻¹DG(0).
    pub l: DMatrix<f64>,
    pub constants: DerivedConstants,
    /// Row-0 coefficients of θ′ in 𝕄₀ (zero for the printed formulation).
    h: Vec<f64>,
    /// Schur complement a0 − Σh_jc_j.
    a_eff: f64,
}

impl GalerkinSystem {
    /// Builds the system; the default formulation is mass-consistent.
    pub fn new(eq: &EquilibriumState, basis: &ModalBasis, formulation: Formulation) -> Self {
        let (r, rho, gamma) = (eq.r_star, eq.rho_star, eq.params.gamma);
        let (a0, h) = match formulation {
            Formulation::MassConsistent => (
                r / (3.0 * rho),
                basis.g.iter().map(|g| r * g / (4.0 * PI * rho)).collect::<Vec<_>>(),
            ),
            Formulation::Printed => (r / (3.0 * gamma * rho), vec![0.0; basis.n]),
        };
        let a_eff = a0 - dot(&h, &basis.c);
        GalerkinSystem {
            eq: *eq,
            basis: basis.clone(),
            formulation,
            l: assemble_linear_with(eq, basis, formulation.closure()),
            constants: derived_constants(eq),
            h,
            a_eff,
        }
    }

    /// Dimension N + 3.
    pub fn dim(&self) -> usize {
        self.basis.n + 3
    }

    /// Applies 𝕄₀⁻¹ using its arrow structure.
    pub fn apply_m0_inv(&self, v: &DVector<f64>) -> DVector<f64> {
        let n = self.basis.n;
        let mut out = v.clone();
        let mut s = v[0];
        for j in 0..n {
            s -= self.h[j] * v[3 + j];
        }
        let b = s / self.a_eff;
        out[0] = b;
        for k in 0..n {
            out[3 + k] = v[3 + k] - self.basis.c[k] * b;
        }
        out
    }

    /// Checks the validity region (ρ̄ ≥ 0.1ρ† on the grid and at y = 0, 1;
    /// R ≥ 0.1R†) and returns the grid density minimum.
    pub fn check_validity(&self, z: &DVector<f64>) -> Result<f64> {
        let eq = &self.eq;
        let r = eq.r_star + z[1];
        if !(r >= VALIDITY_RADIUS_FRACTION * eq.r_star) || !r.is_finite() {
            return Err(BubbleError::ValidityRegion(format!(
                "radius {r:e} below {} R*",
                VALIDITY_RADIUS_FRACTION
            )));
        }
        let theta: Vec<f64> = z.iter().skip(3).copied().collect();
        let fields = self.basis.grid_fields(&theta);
        let b = eq.rho_star + z[0];
        let centre = b + self.basis.reconstruct(&theta, 0.0);
        let min = fields
            .f
            .iter()
            .map(|f| b + f)
            .fold(b.min(centre), f64::min);
        if !(min >= VALIDITY_DENSITY_FRACTION * eq.rho_star) {
            return Err(BubbleError::ValidityRegion(format!(
                "density {min:e} below {} rho*",
                VALIDITY_DENSITY_FRACTION
            )));
        }
        Ok(min)
    }

    fn pieces(&self, z: &DVector<f64>) -> Result<Pieces> {
        self.check_validity(z)?;
        let eq = &self.eq;
        let p = &eq.params;
        let dc = &self.constants;
        let basis = &self.basis;
        let n = basis.n;
        let (r_s, rho_s) = (eq.r_star, eq.rho_star);
        let (rho2, dr, v) = (z[0], z[1], z[2]);
        let theta: Vec<f64> = z.iter().skip(3).copied().collect();
        let b = rho_s + rho2;
        let r = r_s + dr;
        let kc = p.kappa / (p.gamma * p.c_g);
        let convective = self.formulation == Formulation::MassConsistent;

        // Interior integrands on the quadrature grid.
        let fields = basis.grid_fields(&theta);
        let q = basis.q();
        let nodes = &basis.quadrature.nodes;
        let mut pi0 = vec![0.0; q];
        let mut pi1 = vec![0.0; q];
        let lin = 1.0 / (r_s * r_s * rho_s);
        for k in 0..q {
            let y = nodes[k];
            let rho = b + fields.f[k];
            let df = fields.df[k];
            let mut val = kc * (1.0 / (r * r * rho) - lin) * fields.lap[k]
                - kc * df * df / (r * r * rho * rho);
            if convective {
                val += v / r * y * df;
            }
            pi0[k] = val * basis.ball_weights[k];
            pi1[k] = (y * df / 3.0 + fields.f[k]) / (p.gamma * b) * basis.ball_weights[k];
        }

        let dim = n + 3;
        let mut g = DVector::zeros(dim);
        let mut d_col0 = DVector::zeros(dim);

        // Interface density row.
        match self.formulation {
            Formulation::MassConsistent => {
                let m_hat = mean_density_integral(eq, basis, rho2, &theta);
                g[0] = -3.0 * r_s * v / (4.0 * PI * rho_s * r) * m_hat;
            }
            Formulation::Printed => {
                let flux = boundary_flux(&theta, false);
                let phi0 = -kc * (1.0 / (r * b * b) - 1.0 / (r_s * rho_s * rho_s)) * flux;
                let phi1 = -dr / (3.0 * p.gamma * b) + r_s * rho2 / (3.0 * p.gamma * rho_s * b);
                g[0] = -v + dot(&basis.omega, &theta) + phi0;
                d_col0[0] = -phi1;
            }
        }

        // Radius rows.
        g[1] = v;
        let rt = p.rt();
        let (psi0, psi1) = self.psi(dr, v);
        g[2] = (rt * rho2 + dc.a * dr - dc.b * v - rt * psi0) / dc.c;
        let d22 = rt * psi1 / dc.c;

        // Modal rows.
        for kk in 0..n {
            let row = basis.xi_row(kk + 1);
            let pi0_k = dot(row, &pi0);
            let pi1_k = dot(row, &pi1);
            g[3 + kk] = -eq.kappa_bar * basis.lambda[kk] * theta[kk] + pi0_k;
            d_col0[3 + kk] = -pi1_k;
        }
        Ok(Pieces { g, d_col0, d22 })
    }

    /// Split of the boundary-relation remainder Ψ = Ψ¹R̈ + Ψ⁰; returns (Ψ⁰, Ψ¹).
    pub fn psi(&self, dr: f64, v: f64) -> (f64, f64) {
        let eq = &self.eq;
        let p = &eq.params;
        let r_s = eq.r_star;
        let r = r_s + dr;
        let rt = p.rt();
        match eq.v_bar() {
            Some(vb) => {
                let rb = eq.rbar_of(r);
                let rbs = eq.rbar_star;
                // 1/R̄ − 1/R̄† without cancellation.
                let d_rbar = (r.powi(3) - r_s.powi(3)) / (rb * rb + rb * rbs + rbs * rbs);
                let inv_rbar_diff = -d_rbar / (rb * rbs);
                let psi1 = p.rho_l / rt * (dr + r_s * r_s / rbs - r * r / rb);
                let visc = 4.0 * p.mu_l * vb * (1.0 / (r * (r.powi(3) + vb)) - 1.0 / (r_s * (r_s.powi(3) + vb))) * v;
                let surf = 2.0 * p.sigma * dr * dr / (r_s * r_s * r);
                let ext = 2.0 * p.sigma_bar * (r_s * r_s * dr / rbs.powi(4) + inv_rbar_diff);
                let q = r / rb;
                let inertia = p.rho_l * (1.5 - 2.0 * q + 0.5 * q.powi(4)) * v * v;
                ((visc + surf + ext + inertia) / rt, psi1)
            }
            None => {
                let psi1 = p.rho_l / rt * dr;
                let visc = 4.0 * p.mu_l * (1.0 / r - 1.0 / r_s) * v;
                let surf = 2.0 * p.sigma * dr * dr / (r_s * r_s * r);
                let inertia = p.rho_l * 1.5 * v * v;
                ((visc + surf + inertia) / rt, psi1)
            }
        }
    }

    /// N⁰(z) and N¹(z).
    pub fn nonlinear_terms(&self, z: &DVector<f64>) -> Result<NonlinearTerms> {
        let pc = self.pieces(z)?;
        let n0 = self.apply_m0_inv(&pc.g) - &self.l * z;
        let dim = self.dim();
        let mut n1 = DMatrix::zeros(dim, dim);
        let col0 = self.apply_m0_inv(&pc.d_col0);
        for i in 0..dim {
            n1[(i, 0)] = -col0[i];
        }
        n1[(2, 2)] = -pc.d22;
        Ok(NonlinearTerms { n0, n1 })
    }

    /// ż from (I − N¹(z))ż = Lz + N⁰(z) by dense LU factorisation.
    pub fn rhs(&self, z: &DVector<f64>) -> Result<DVector<f64>> {
        let pc = self.pieces(z)?;
        let dim = self.dim();
        let forcing = self.apply_m0_inv(&pc.g);
        let col0 = self.apply_m0_inv(&pc.d_col0);
        let mut a = DMatrix::identity(dim, dim);
        for i in 0..dim {
            a[(i, 0)] += col0[i];
        }
        a[(2, 2)] += pc.d22;
        let lu = a.lu();
        lu.solve(&forcing).ok_or_else(|| {
            BubbleError::Singular(format!(
                "I - N1(z) is singular (pivot product {:e})",
                lu.determinant()
            ))
        })
    }

    /// Gas mass of a flat state vector.
    pub fn mass(&self, z: &DVector<f64>) -> f64 {
        ModalState::from_vector(z).mass(&self.eq, &self.basis)
    }
}

/// Initial profile: ρ₀(R₀y) ∝ ρ†(1 + eps·shape(y)), R₀ = R†(1+delta), Ṙ₀ = dR0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialProfile {
    pub eps: f64,
    pub delta: f64,
    #[serde(rename = "dR0")]
    pub d_r0: f64,
    pub shape: Shape,
}

/// Radial shape functions vanishing at y = 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shape {
    /// 1 − y².
    Parabolic,
    /// sin(kπy)/(kπy), the k-th eigenfunction normalised to 1 at the centre.
    Mode(usize),
}

impl Shape {
    /// Shape value at radius y.
    pub fn eval(&self, y: f64) -> f64 {
        match *self {
            Shape::Parabolic => 1.0 - y * y,
            Shape::Mode(k) => eigenfunction(k, y) / eigenfunction(k, 0.0),
        }
    }

    /// Parses `"parabolic"` or `"mode-k"`.
    pub fn parse(s: &str) -> Result<Shape> {
        if s == "parabolic" {
            return Ok(Shape::Parabolic);
        }
        if let Some(k) = s.strip_prefix("mode-") {
            if let Ok(k) = k.parse::<usize>() {
                if k >= 1 {
                    return Ok(Shape::Mode(k));
                }
            }
        }
        Err(BubbleError::field(
            "shape",
            format!("unknown shape \"{s}\" (expected \"parabolic\" or \"mode-k\")"),
        ))
    }

    /// Canonical name.
    pub fn name(&self) -> String {
        match self {
            Shape::Parabolic => "parabolic".into(),
            Shape::Mode(k) => format!("mode-{k}"),
        }
    }
}

/// Mass-projected initial state: the density ρ†(1 + eps·shape) is multiplied
/// by the unique constant making the truncated gas mass equal to M.
pub fn make_initial(profile: &InitialProfile, eq: &EquilibriumState, basis: &ModalBasis) -> Result<ModalState> {
    let shape = profile.shape;
    if shape.eval(1.0).abs() > 1e-12 {
        return Err(BubbleError::field("shape", "shape must vanish at y = 1"));
    }
    let r0 = eq.r_star * (1.0 + profile.delta);
    if !(r0 > 0.0) {
        return Err(BubbleError::field("delta", "initial radius must be positive"));
    }
    let shape_theta = basis.project(|y| shape.eval(y));
    let integral = 4.0 * PI / 3.0 + profile.eps * dot(&basis.g, &shape_theta);
    let scale = eq.mv.m / (r0.powi(3) * eq.rho_star * integral);
    let amplitude = eq.rho_star * scale;
    let theta: Vec<f64> = shape_theta.iter().map(|t| amplitude * profile.eps * t).collect();
    let state = ModalState {
        rho2: amplitude - eq.rho_star,
        delta_r: r0 - eq.r_star,
        d_r: profile.d_r0,
        theta,
    };
    let min = basis
        .quadrature
        .nodes
        .iter()
        .chain([0.0, 1.0].iter())
        .map(|&y| state.density(eq, y))
        .fold(f64::INFINITY, f64::min);
    if !(min > 0.0) {
        return Err(BubbleError::field("eps", "initial density is not positive"));
    }
    Ok(state)
}

/// Scales `eps` (and `delta`, `dR0` proportionally) so that ‖z₀‖ hits `target`.
pub fn make_initial_with_norm(
    profile: &InitialProfile,
    target: f64,
    eq: &EquilibriumState,
    basis: &ModalBasis,
) -> Result<(InitialProfile, ModalState)> {
    let mut prof = *profile;
    let mut state = make_initial(&prof, eq, basis)?;
    for _ in 0..30 {
        let norm = state.norm();
        if norm == 0.0 {
            return Err(BubbleError::field("eps", "profile produces a zero perturbation"));
        }
        if (norm - target).abs() <= 1e-13 * target {
            break;
        }
        let f = target / norm;
        prof.eps *= f;
        prof.delta *= f;
        prof.d_r0 *= f;
        state = make_initial(&prof, eq, basis)?;
    }
    Ok((prof, state))
}

/// State vector of a neighbouring equilibrium (M′, V) expressed around `eq`.
pub fn manifold_point(eq: &EquilibriumState, other: &EquilibriumState, n: usize) -> ModalState {
    ModalState {
        rho2: other.rho_star - eq.rho_star,
        delta_r: other.r_star - eq.r_star,
        d_r: 0.0,
        theta: vec![0.0; n],
    }
}

/// 1 − R/R̄ for a perturbed radius (1 for infinite volume).
pub fn shell_factor(eq: &EquilibriumState, r: f64) -> f64 {
    gap_ratio(r, eq.v_bar())
}

/// Initial state along the slowest decaying eigenvector of L (real part of
/// the eigenvector for a complex pair), scaled to norm `target`, then moved
/// along the kernel direction U so that the gas mass equals M exactly.
///
/// Such data carry no fast initial layer, so sampled energies are smooth.
pub fn slow_mode_initial(sys: &GalerkinSystem, target: f64) -> Result<ModalState> {
    use nalgebra::Complex;
    let eq = &sys.eq;
    let dim = sys.dim();
    let scale = eq.pi2_kappa_bar();
    let eigs = sys.l.clone().complex_eigenvalues();
    let lambda = eigs
        .iter()
        .filter(|l| l.norm() > 1e-8 * scale)
        .max_by(|a, b| a.re.total_cmp(&b.re))
        .copied()
        .ok_or_else(|| BubbleError::Numerical("no nonzero eigenvalue".into()))?;
    // Inverse iteration with a slightly shifted eigenvalue.
    let shift = lambda + Complex::new(1e-10 * scale, 0.0);
    let a = sys.l.map(|x| Complex::new(x, 0.0)) - DMatrix::<Complex<f64>>::identity(dim, dim) * shift;
    let lu = a.lu();
    let mut v = DVector::<Complex<f64>>::from_element(dim, Complex::new(1.0, 0.3));
    for _ in 0..4 {
        v = lu
            .solve(&v)
            .ok_or_else(|| BubbleError::Singular("inverse iteration failed".into()))?;
        let n = v.norm();
        v /= Complex::new(n, 0.0);
    }
    // Rotate so the real part carries the largest weight.
    let k = (0..dim)
        .max_by(|&a, &b| v[a].norm().total_cmp(&v[b].norm()))
        .unwrap_or(0);
    let phase = v[k] / Complex::new(v[k].norm(), 0.0);
    let re: DVector<f64> = v.map(|c| (c / phase).re);
    let mut z = &re * (target / re.norm());
    let u = crate::linear::right_kernel_vector(eq, dim);
    let m = eq.mv.m;
    let mut alpha = 0.0;
    for _ in 0..50 {
        let f = sys.mass(&(&z + &u * alpha)) - m;
        let h = 1e-7 * (1.0 + alpha.abs());
        let df = (sys.mass(&(&z + &u * (alpha + h))) - sys.mass(&(&z + &u * (alpha - h)))) / (2.0 * h);
        let step = f / df;
        alpha -= step;
        if step.abs() <= 1e-15 * (1.0 + alpha.abs()) {
            break;
        }
    }
    z += &u * alpha;
    Ok(ModalState::from_vector(&z))
}
