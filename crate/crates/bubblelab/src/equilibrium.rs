//! Spherically symmetric equilibria: the ninth-degree radius polynomial, its
//! unique admissible root, the equilibrium density, the inverse map and the
//! derived constants used by the dynamics and spectral modules.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{BubbleError, Result};
use crate::params::{MassVolumePair, PhysicalParams, Volume};

/// Width (in the scaled variable w = R/√I) at which bisection hands over
/// to safeguarded Newton.
const BISECTION_WIDTH: f64 = 1e-6;

/// Relative disagreement tolerated between the two density expressions.
const DENSITY_AGREEMENT: f64 = 1e-10;

/// The equilibrium (ρ†, R†) of a mass-volume pair with its certificates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquilibriumState {
    /// Material parameters the state was computed for.
    pub params: PhysicalParams,
    /// Gas mass and liquid volume.
    pub mv: MassVolumePair,
    /// Equilibrium bubble radius R†.
    pub r_star: f64,
    /// Equilibrium gas density ρ†.
    pub rho_star: f64,
    /// External radius R̄† = (R†³ + V̄)^{1/3} (infinite for infinite volume).
    pub rbar_star: f64,
    /// Aggregate I = 3𝔎T∞M/(8πσ).
    pub i: f64,
    /// Surface-tension ratio β = σ̄/σ.
    pub beta: f64,
    /// Modal diffusivity κ̄ = κ/(R†²ρ†γc_g).
    pub kappa_bar: f64,
    /// Effective inertial radius R̃ = R† − R†²/R̄†.
    pub r_tilde: f64,
    /// Maximum relative residual of the two algebraic equilibrium equations.
    pub residual: f64,
    /// |𝔓(R†)| relative to the sum of the magnitudes of its terms.
    pub poly_residual: f64,
    /// Open bracket (√I/√(1+β), √I) containing R†.
    pub bracket: [f64; 2],
}

impl EquilibriumState {
    /// Modified volume V̄ (`None` for infinite volume).
    pub fn v_bar(&self) -> Option<f64> {
        self.mv.v_bar()
    }

    /// Ratio R†/R̄† (zero for infinite volume).
    pub fn radius_ratio(&self) -> f64 {
        match self.v_bar() {
            Some(_) => self.r_star / self.rbar_star,
            None => 0.0,
        }
    }

    /// Equilibrium pressure 𝔎T∞ρ†.
    pub fn pressure(&self) -> f64 {
        self.params.rt() * self.rho_star
    }

    /// Spectral unit π²κ̄ (decay rate of the slowest pure diffusion mode).
    pub fn pi2_kappa_bar(&self) -> f64 {
        PI * PI * self.kappa_bar
    }

    /// External radius for a perturbed bubble radius `r`.
    pub fn rbar_of(&self, r: f64) -> f64 {
        match self.v_bar() {
            Some(vb) => (r * r * r + vb).cbrt(),
            None => f64::INFINITY,
        }
    }
}

/// Coefficients of 𝔓(x) = (β³+1)x⁹ − 3Ix⁷ + V̄x⁶ + 3I²x⁵ − 3IV̄x⁴ − I³x³
/// + 3I²V̄x² − I³V̄, ordered by ascending degree.
pub fn poly_coeffs(i: f64, beta: f64, v_bar: f64) -> Result<[f64; 10]> {
    if !(i > 0.0 && i.is_finite()) {
        return Err(BubbleError::field("I", "I must be positive"));
    }
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(BubbleError::field("beta", "beta must be non-negative"));
    }
    if !(v_bar >= 0.0 && v_bar.is_finite()) {
        return Err(BubbleError::field("V_bar", "V_bar must be non-negative"));
    }
    let i2 = i * i;
    let i3 = i2 * i;
    Ok([
        -i3 * v_bar,
        0.0,
        3.0 * i2 * v_bar,
        -i3,
        -3.0 * i * v_bar,
        3.0 * i2,
        v_bar,
        -3.0 * i,
        0.0,
        beta * beta * beta + 1.0,
    ])
}

/// Horner evaluation of an ascending coefficient vector.
pub fn poly_eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Scaled polynomial 𝕂(w) = 𝔓(w√I)/I^{9/2} with v = V̄/I^{3/2}:
/// (β³+1)w⁹ − 3w⁷ + vw⁶ + 3w⁵ − 3vw⁴ − w³ + 3vw² − v.
pub fn scaled_poly(w: f64, beta: f64, v: f64) -> f64 {
    let c = [
        -v,
        0.0,
        3.0 * v,
        -1.0,
        -3.0 * v,
        3.0,
        v,
        -3.0,
        0.0,
        beta * beta * beta + 1.0,
    ];
    poly_eval(&c, w)
}

/// Sum of the magnitudes of the terms of 𝕂(w); used as its rounding scale.
pub fn scaled_poly_scale(w: f64, beta: f64, v: f64) -> f64 {
    let c = [
        v,
        0.0,
        3.0 * v,
        1.0,
        3.0 * v,
        3.0,
        v,
        3.0,
        0.0,
        beta * beta * beta + 1.0,
    ];
    poly_eval(&c, w.abs())
}

/// Monotone factored form h(w) = (1−w²)(w³+v)^{1/3}/w³ − β, whose unique root
/// on (1/√(1+β), 1) coincides with that of 𝕂; returns (h, h').
fn factored(w: f64, beta: f64, v: f64) -> (f64, f64) {
    let w2 = w * w;
    let w3 = w2 * w;
    let s = (w3 + v).cbrt();
    let g = (1.0 - w2) / w3;
    let dg = -2.0 / w2 - 3.0 * (1.0 - w2) / (w3 * w);
    let ds = w2 / (s * s);
    (g * s - beta, dg * s + g * ds)
}

/// Finds the equilibrium of a mass-volume pair.
///
/// The root of 𝔓 is located on the scaled bracket (1/√(1+β), 1) by bisection
/// on the monotone factored form down to width 1e−6, then polished with
/// bisection-safeguarded Newton. β = 0 and infinite volume are closed forms.
pub fn solve_radius(m: f64, v: Volume, p: &PhysicalParams) -> Result<EquilibriumState> {
    let mv = MassVolumePair::new(m, v)?;
    let i = 3.0 * p.rt() * m / (8.0 * PI * p.sigma);
    let beta = p.beta();
    let sqrt_i = i.sqrt();
    let lo = 1.0 / (1.0 + beta).sqrt();
    let w = match mv.v_bar() {
        _ if beta == 0.0 => 1.0,
        None => 1.0,
        Some(vb) => {
            let v = vb / (i * sqrt_i);
            solve_scaled(lo, beta, v)?
        }
    };
    let r_star = w * sqrt_i;
    finish_state(p, mv, r_star, i, beta, [lo * sqrt_i, sqrt_i])
}

fn solve_scaled(lo: f64, beta: f64, v: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, 1.0);
    let (fa, fb) = (factored(a, beta, v).0, factored(b, beta, v).0);
    if !(fa > 0.0 && fb < 0.0) {
        return Err(BubbleError::Inconsistent(format!(
            "no sign change in the equilibrium bracket (h(lo)={fa:e}, h(hi)={fb:e})"
        )));
    }
    while b - a > BISECTION_WIDTH {
        let mid = 0.5 * (a + b);
        if factored(mid, beta, v).0 > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let mut w = 0.5 * (a + b);
    for _ in 0..100 {
        let (h, dh) = factored(w, beta, v);
        if h == 0.0 {
            break;
        }
        if h > 0.0 {
            a = w;
        } else {
            b = w;
        }
        let mut next = w - h / dh;
        if !(next > a && next < b) {
            next = 0.5 * (a + b);
        }
        let step = (next - w).abs();
        w = next;
        if step <= 4.0 * f64::EPSILON * w {
            break;
        }
    }
    Ok(w)
}

fn finish_state(
    p: &PhysicalParams,
    mv: MassVolumePair,
    r_star: f64,
    i: f64,
    beta: f64,
    bracket: [f64; 2],
) -> Result<EquilibriumState> {
    let rbar_star = match mv.v_bar() {
        Some(vb) => (r_star.powi(3) + vb).cbrt(),
        None => f64::INFINITY,
    };
    let rho_star = equilibrium_density(r_star, p, mv.m, mv.v)?;
    let rho_mass = 3.0 * mv.m / (4.0 * PI * r_star.powi(3));
    let rho_tension = density_from_tension(p, r_star, rbar_star);
    let residual = ((rho_mass - rho_star).abs() / rho_star)
        .max((rho_tension - rho_star).abs() / rho_star)
        .max(((4.0 * PI / 3.0) * rho_star * r_star.powi(3) - mv.m).abs() / mv.m);
    let poly_residual = match mv.v_bar() {
        Some(vb) => {
            let w = r_star / i.sqrt();
            let v = vb / i.powf(1.5);
            scaled_poly(w, beta, v).abs() / scaled_poly_scale(w, beta, v)
        }
        None => 0.0,
    };
    let kappa_bar = p.kappa / (r_star * r_star * rho_star * p.gamma * p.c_g);
    let r_tilde = r_star * gap_ratio(r_star, mv.v_bar());
    Ok(EquilibriumState {
        params: *p,
        mv,
        r_star,
        rho_star,
        rbar_star,
        i,
        beta,
        kappa_bar,
        r_tilde,
        residual,
        poly_residual,
        bracket,
    })
}

/// 1 − R/R̄ evaluated without cancellation as V̄/(R̄(R̄² + R̄R + R²)).
pub fn gap_ratio(r: f64, v_bar: Option<f64>) -> f64 {
    match v_bar {
        Some(vb) => {
            let rb = (r.powi(3) + vb).cbrt();
            vb / (rb * (rb * rb + rb * r + r * r))
        }
        None => 1.0,
    }
}

fn density_from_tension(p: &PhysicalParams, r: f64, rbar: f64) -> f64 {
    let ext = if rbar.is_finite() { p.sigma_bar / rbar } else { 0.0 };
    2.0 / p.rt() * (p.sigma / r + ext)
}

/// Equilibrium density from both expressions 3M/(4πR†³) and
/// (2/(𝔎T∞))(σ/R† + σ̄/R̄†); errors if they disagree beyond 1e−10 relative.
pub fn equilibrium_density(r_star: f64, p: &PhysicalParams, m: f64, v: Volume) -> Result<f64> {
    let rbar = match v.v_bar() {
        Some(vb) => (r_star.powi(3) + vb).cbrt(),
        None => f64::INFINITY,
    };
    let a = 3.0 * m / (4.0 * PI * r_star.powi(3));
    let b = density_from_tension(p, r_star, rbar);
    let mean = 0.5 * (a + b);
    if (a - b).abs() > DENSITY_AGREEMENT * mean {
        return Err(BubbleError::Numerical(format!(
            "density expressions disagree: {a:e} vs {b:e} (bad root)"
        )));
    }
    Ok(mean)
}

/// Maps an equilibrium (ρ†, R†) back to its mass-volume pair:
/// M = (4π/3)ρ†R†³, V = (4πR†³/3)([2σ̄/(𝔎T∞ρ†R† − 2σ)]³ − 1).
pub fn inverse_map(rho_star: f64, r_star: f64, p: &PhysicalParams) -> Result<MassVolumePair> {
    let excess = p.rt() * rho_star * r_star - 2.0 * p.sigma;
    let scale = p.rt() * rho_star * r_star;
    if !(excess > 1e-14 * scale) || p.sigma_bar == 0.0 {
        return Err(BubbleError::NotOnManifold(format!(
            "R_spec*T_inf*rho*R - 2*sigma = {excess:e} must be positive with sigma_bar > 0"
        )));
    }
    let ratio = 2.0 * p.sigma_bar / excess;
    let cube = ratio.powi(3) - 1.0;
    if !(cube > 0.0) {
        return Err(BubbleError::NotOnManifold(format!(
            "implied external radius {ratio} R is not larger than R"
        )));
    }
    let m = 4.0 * PI / 3.0 * rho_star * r_star.powi(3);
    let v = 4.0 * PI / 3.0 * r_star.powi(3) * cube;
    MassVolumePair::new(m, Volume::Finite(v))
}

/// Equilibrium whose modified volume is a prescribed fraction of R†³.
///
/// Solves R̄† = R†(1+ratio)^{1/3} together with the density relation for the
/// radius that produces gas mass `m`; used to build small-volume families.
pub fn solve_with_volume_ratio(m: f64, ratio: f64, p: &PhysicalParams) -> Result<EquilibriumState> {
    if !(ratio > 0.0) {
        return Err(BubbleError::field("ratio", "volume ratio must be positive"));
    }
    // (4π/3)ρR³ = M with ρ = (2/(𝔎T∞))(σ/R + σ̄/(R s)), s = (1+ratio)^{1/3}
    // gives R² = 3𝔎T∞M/(8π(σ + σ̄/s)).
    let s = (1.0 + ratio).cbrt();
    let r = (3.0 * p.rt() * m / (8.0 * PI * (p.sigma + p.sigma_bar / s))).sqrt();
    let v_bar = ratio * r.powi(3);
    solve_radius(m, Volume::from_v_bar(v_bar), p)
}

/// Constants of the linearised problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedConstants {
    /// κ̄ = κ/(R†²ρ†γc_g).
    pub kappa_bar: f64,
    /// R̃ = R† − R†²/R̄†.
    pub r_tilde: f64,
    /// Surface stiffness A = 2σ/R†² + 2σ̄R†²/R̄†⁴.
    #[serde(rename = "A")]
    pub a: f64,
    /// Viscous damping B = 4μ_lV̄/(R†(R†³+V̄)).
    #[serde(rename = "B")]
    pub b: f64,
    /// Inertia C = ρ_lR̃.
    #[serde(rename = "C")]
    pub c: f64,
    /// Pressure coupling K = 2𝔎T∞ρ†R̄†/(ρ_lR†²(R̄†−R†)).
    #[serde(rename = "K")]
    pub k: f64,
}

/// Computes (κ̄, R̃, A, B, C, K) for an equilibrium. K is evaluated in the
/// overflow-safe form 2𝔎T∞ρ†/(ρ_lR†²(1 − R†/R̄†)).
pub fn derived_constants(eq: &EquilibriumState) -> DerivedConstants {
    let p = &eq.params;
    let r = eq.r_star;
    let q = eq.radius_ratio();
    let a = 2.0 * p.sigma / (r * r) + 2.0 * p.sigma_bar * q.powi(4) / (r * r);
    let b = match eq.v_bar() {
        Some(vb) => 4.0 * p.mu_l * vb / (r * (r.powi(3) + vb)),
        None => 4.0 * p.mu_l / r,
    };
    let c = p.rho_l * eq.r_tilde;
    let k = 2.0 * p.rt() * eq.rho_star / (p.rho_l * r * r * gap_ratio(r, eq.v_bar()));
    DerivedConstants {
        kappa_bar: eq.kappa_bar,
        r_tilde: eq.r_tilde,
        a,
        b,
        c,
        k,
    }
}
