//! Independent method-of-lines discretization of the fixed-domain problem on
//! a uniform radial grid, used to cross-validate the Galerkin system.
//!
//! Unknowns are ρ̄ at y_i = i/G (i = 0…G, the last one being the interface
//! value), R and Ṙ. The interior equation
//!
//!   ∂_tρ̄ = (κ/(γc_gR²))Δ_y log ρ̄ + (q/γ)(ρ̄ + y∂_yρ̄/3) + (Ṙ/R)y∂_yρ̄
//!
//! is discretized with second-order central differences in conservative
//! form. The pressure rate q = ṗ/p follows from the kinematic condition at
//! the interface, q = −(3γ/R)(Ṙ + κ∂_yρ̄(1)/(γc_gRρ̄(1)²)), so the interface
//! value evolves as ∂_tρ̄(1) = qρ̄(1). R̈ is obtained from the algebraic
//! boundary relation given ρ̄(1).

use std::f64::consts::PI;

use nalgebra::DVector;

use crate::dynamics::{ModalState, VALIDITY_DENSITY_FRACTION, VALIDITY_RADIUS_FRACTION};
use crate::energy::RadialProfile;
use crate::equilibrium::EquilibriumState;
use crate::error::{BubbleError, Result};
use crate::integrator::{integrate, OdeSystem};
use crate::modal::ModalBasis;
use crate::simulate::{output_times, SimulationOptions, Trajectory};

/// Smallest admissible grid.
pub const MIN_GRID: usize = 64;

/// The finite-difference system for one equilibrium and grid size G.
#[derive(Debug, Clone)]
pub struct FdSystem {
    pub eq: EquilibriumState,
    /// Number of grid intervals G.
    pub g: usize,
    /// Composite-Simpson ball weights 4πw_iy_i² (G even) or trapezoid.
    weights: Vec<f64>,
}

impl FdSystem {
    /// Builds the system; G must be at least [`MIN_GRID`].
    pub fn new(eq: &EquilibriumState, g: usize) -> Result<Self> {
        if g < MIN_GRID {
            return Err(BubbleError::field("grid", format!("grid size {g} below {MIN_GRID}")));
        }
        let dy = 1.0 / g as f64;
        let weights = (0..=g)
            .map(|i| {
                let w = if g % 2 == 0 {
                    if i == 0 || i == g {
                        1.0 / 3.0
                    } else if i % 2 == 1 {
                        4.0 / 3.0
                    } else {
                        2.0 / 3.0
                    }
                } else if i == 0 || i == g {
                    0.5
                } else {
                    1.0
                };
                let y = i as f64 * dy;
                4.0 * PI * w * dy * y * y
            })
            .collect();
        Ok(FdSystem { eq: *eq, g, weights })
    }

    /// Grid radius y_i.
    pub fn node(&self, i: usize) -> f64 {
        i as f64 / self.g as f64
    }

    /// Grid state from a modal state by pointwise reconstruction.
    pub fn from_modal(&self, state: &ModalState) -> DVector<f64> {
        let g = self.g;
        let mut z = DVector::zeros(g + 3);
        for i in 0..=g {
            z[i] = state.density(&self.eq, self.node(i));
        }
        z[g] = self.eq.rho_star + state.rho2;
        z[g + 1] = self.eq.r_star + state.delta_r;
        z[g + 2] = state.d_r;
        z
    }

    /// ∂_yρ̄ on the grid (central inside, 0 at the centre, one-sided second
    /// order at the interface).
    fn slopes(&self, rho: &[f64]) -> Vec<f64> {
        let g = self.g;
        let dy = 1.0 / g as f64;
        let mut s = vec![0.0; g + 1];
        for i in 1..g {
            s[i] = (rho[i + 1] - rho[i - 1]) / (2.0 * dy);
        }
        s[g] = (3.0 * rho[g] - 4.0 * rho[g - 1] + rho[g - 2]) / (2.0 * dy);
        s
    }

    /// Radial profile (for energies) of a grid state.
    pub fn profile(&self, z: &DVector<f64>) -> RadialProfile {
        let g = self.g;
        let rho: Vec<f64> = z.iter().take(g + 1).copied().collect();
        let rho_s = self.eq.rho_star;
        let excess: Vec<f64> = rho.iter().map(|r| r - rho_s).collect();
        let excess_integral = excess.iter().zip(&self.weights).map(|(e, w)| e * w).sum();
        RadialProfile {
            rho2: rho[g] - rho_s,
            delta_r: z[g + 1] - self.eq.r_star,
            d_r: z[g + 2],
            weights: self.weights.clone(),
            nodes: (0..=g).map(|i| self.node(i)).collect(),
            slope: self.slopes(&rho),
            excess,
            excess_integral,
        }
    }

    /// Modal projection: ρ̃₂ = ρ̄(1) − ρ†, θ_j = ∫_{B₁}(ρ̄ − ρ̄(1))Ξ_j by Simpson.
    pub fn to_modal(&self, z: &DVector<f64>, basis: &ModalBasis) -> ModalState {
        let g = self.g;
        let b = z[g];
        let theta = (1..=basis.n)
            .map(|j| {
                (0..=g)
                    .map(|i| self.weights[i] * (z[i] - b) * crate::modal::eigenfunction(j, self.node(i)))
                    .sum()
            })
            .collect();
        ModalState {
            rho2: b - self.eq.rho_star,
            delta_r: z[g + 1] - self.eq.r_star,
            d_r: z[g + 2],
            theta,
        }
    }

    /// Gas mass R³∫_{B₁}ρ̄ by Simpson.
    pub fn mass(&self, z: &DVector<f64>) -> f64 {
        let g = self.g;
        let r = z[g + 1];
        r.powi(3) * (0..=g).map(|i| self.weights[i] * z[i]).sum::<f64>()
    }

    /// R̈ from the boundary relation
    /// ρ_l(R − R²/R̄)R̈ + ρ_l(3/2 − 2R/R̄ + R⁴/(2R̄⁴))Ṙ² + 4μ_lV̄Ṙ/(R(R³+V̄))
    ///   = 𝔎T∞ρ̄(1) − 2σ/R − 2σ̄/R̄.
    pub fn radial_acceleration(&self, b: f64, r: f64, v: f64) -> f64 {
        let p = &self.eq.params;
        match self.eq.v_bar() {
            Some(vb) => {
                let rb = (r.powi(3) + vb).cbrt();
                let q = r / rb;
                let inertia = p.rho_l * r * crate::equilibrium::gap_ratio(r, Some(vb));
                let rhs = p.rt() * b
                    - 2.0 * p.sigma / r
                    - 2.0 * p.sigma_bar / rb
                    - p.rho_l * (1.5 - 2.0 * q + 0.5 * q.powi(4)) * v * v
                    - 4.0 * p.mu_l * vb * v / (r * (r.powi(3) + vb));
                rhs / inertia
            }
            None => {
                let rhs = p.rt() * b - 2.0 * p.sigma / r - 1.5 * p.rho_l * v * v - 4.0 * p.mu_l * v / r;
                rhs / (p.rho_l * r)
            }
        }
    }
}

impl OdeSystem for FdSystem {
    fn dim(&self) -> usize {
        self.g + 3
    }

    fn rhs(&self, z: &DVector<f64>) -> Result<DVector<f64>> {
        self.check(z)?;
        let p = &self.eq.params;
        let g = self.g;
        let dy = 1.0 / g as f64;
        let (b, r, v) = (z[g], z[g + 1], z[g + 2]);
        let rho: Vec<f64> = z.iter().take(g + 1).copied().collect();
        let logs: Vec<f64> = rho.iter().map(|x| x.ln()).collect();
        let slope = self.slopes(&rho);
        let diff = p.kappa / (p.gamma * p.c_g * r * r);
        let q = -3.0 * p.gamma / r * (v + p.kappa * slope[g] / (p.gamma * p.c_g * r * b * b));
        let mut out = DVector::zeros(g + 3);
        // Centre: Δf = 3f'' by symmetry, and y∂_yρ̄ = 0.
        out[0] = diff * 6.0 * (logs[1] - logs[0]) / (dy * dy) + q / p.gamma * rho[0];
        for i in 1..g {
            let y = self.node(i);
            let yp = y + 0.5 * dy;
            let ym = y - 0.5 * dy;
            let lap = (yp * yp * (logs[i + 1] - logs[i]) - ym * ym * (logs[i] - logs[i - 1])) / (y * y * dy * dy);
            out[i] = diff * lap + q / p.gamma * (rho[i] + y * slope[i] / 3.0) + v / r * y * slope[i];
        }
        out[g] = q * b;
        out[g + 1] = v;
        out[g + 2] = self.radial_acceleration(b, r, v);
        Ok(out)
    }

    fn check(&self, z: &DVector<f64>) -> Result<()> {
        let g = self.g;
        let r = z[g + 1];
        if !(r >= VALIDITY_RADIUS_FRACTION * self.eq.r_star) {
            return Err(BubbleError::ValidityRegion(format!("radius {r:e} below validity bound")));
        }
        let min = z.iter().take(g + 1).copied().fold(f64::INFINITY, f64::min);
        if !(min >= VALIDITY_DENSITY_FRACTION * self.eq.rho_star) {
            return Err(BubbleError::ValidityRegion(format!("density {min:e} below validity bound")));
        }
        Ok(())
    }
}

/// Integrates the finite-difference system from a grid state; samples are
/// projected onto `basis` so the trajectory is comparable with the Galerkin one.
pub fn fd_oracle(
    sys: &FdSystem,
    ic: &DVector<f64>,
    basis: &ModalBasis,
    t_end: f64,
    opts: &SimulationOptions,
) -> Result<Trajectory> {
    if ic.len() != sys.g + 3 {
        return Err(BubbleError::field("grid", "initial grid state has the wrong length"));
    }
    let times = output_times(t_end, opts.output_dt)?;
    let mut traj = Trajectory::empty();
    let eq = sys.eq;
    let result = integrate(sys, 0.0, ic, &times, &opts.integrator, |t, z| {
        let dz = sys.rhs(z)?;
        let state = sys.to_modal(z, basis);
        let profile = sys.profile(z);
        traj.push(t, state, &profile, &eq, dz.norm())
    })?;
    traj.stats = result.stats;
    traj.stopped = result.stopped.map(|s| s.error.to_string());
    Ok(traj)
}
