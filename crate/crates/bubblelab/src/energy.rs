//! Physical energy, dissipation rate and the local-minimizer quadratic form,
//! evaluated on radial density profiles, plus trajectory audits.
//!
//! Energies are reported as E = E₁ + E₂ together with the gap E − E†, which
//! is evaluated in a cancellation-free form so it stays accurate for
//! perturbations far below the magnitude of E itself.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{make_initial, InitialProfile, ModalState, Shape};
use crate::equilibrium::{gap_ratio, EquilibriumState};
use crate::error::{BubbleError, Result};
use crate::modal::{dot, ModalBasis};

/// Default working radius standing in for the non-constructive δ₀.
pub const DEFAULT_MINIMIZER_RADIUS: f64 = 0.05;

/// A spherically symmetric state sampled on a radial rule.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    /// ρ̃₂ = ρ̄(1) − ρ†.
    pub rho2: f64,
    /// R − R†.
    pub delta_r: f64,
    /// Ṙ.
    pub d_r: f64,
    /// Ball weights: Σ_q weights[q]·f(y_q) ≈ ∫_{B₁} f.
    pub weights: Vec<f64>,
    /// Radii y_q.
    pub nodes: Vec<f64>,
    /// ρ̄(y_q) − ρ†.
    pub excess: Vec<f64>,
    /// ∂_yρ̄(y_q).
    pub slope: Vec<f64>,
    /// ∫_{B₁}(ρ̄ − ρ†), evaluated as exactly as the representation allows.
    pub excess_integral: f64,
}

impl RadialProfile {
    /// Profile of a modal state on the basis quadrature grid.
    pub fn from_modal(state: &ModalState, basis: &ModalBasis) -> Self {
        let fields = basis.grid_fields(&state.theta);
        RadialProfile {
            rho2: state.rho2,
            delta_r: state.delta_r,
            d_r: state.d_r,
            weights: basis.ball_weights.clone(),
            nodes: basis.quadrature.nodes.clone(),
            excess: fields.f.iter().map(|f| f + state.rho2).collect(),
            slope: fields.df,
            excess_integral: 4.0 * PI / 3.0 * state.rho2 + dot(&basis.g, &state.theta),
        }
    }

    /// Gas mass R³∫_{B₁}ρ̄.
    pub fn mass(&self, eq: &EquilibriumState) -> f64 {
        let r = eq.r_star + self.delta_r;
        r.powi(3) * (4.0 * PI / 3.0 * eq.rho_star + self.excess_integral)
    }

    /// ∫_{B₁}(ρ̄ − ρ†)².
    pub fn excess_l2(&self) -> f64 {
        self.excess
            .iter()
            .zip(&self.weights)
            .map(|(e, w)| w * e * e)
            .sum()
    }
}

/// Energy and dissipation of one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    /// Total energy E = E₁ + E₂.
    #[serde(rename = "E")]
    pub e: f64,
    /// Helmholtz free-energy part.
    #[serde(rename = "E1")]
    pub e1: f64,
    /// Kinetic and surface part (the σ̄R̄² term is omitted for infinite volume).
    #[serde(rename = "E2")]
    pub e2: f64,
    /// Dissipation rate D ≥ 0.
    #[serde(rename = "D")]
    pub d: f64,
    /// Heat-conduction part of D.
    pub d_thermal: f64,
    /// Viscous part of D.
    pub d_viscous: f64,
    /// E − E†.
    pub gap: f64,
    /// ¼ of the quadratic lower bound.
    pub quad_form: f64,
}

fn check_positive(profile: &RadialProfile, eq: &EquilibriumState) -> Result<()> {
    let r = eq.r_star + profile.delta_r;
    if !(r > 0.0) {
        return Err(BubbleError::ValidityRegion(format!("radius {r:e} is not positive")));
    }
    let b = eq.rho_star + profile.rho2;
    let min = profile
        .excess
        .iter()
        .map(|e| eq.rho_star + e)
        .fold(b, f64::min);
    if !(min > 0.0) {
        return Err(BubbleError::ValidityRegion(format!(
            "nonpositive density {min:e} under the logarithm"
        )));
    }
    Ok(())
}

/// E₁, E₂ and the gap E − E† of a profile.
///
/// The gap uses the state's own mass M_s = R³∫ρ̄ and
/// J = ∫_{B₁}ρ̄·log(1 + (ρ̄−ρ†)/ρ†):
/// E₁ − E₁† = (4πc_gT/3)ρ†R†³·expm1(log(b/ρ†) + 3log(R/R†))
///            − c_gT[(M_s−M)log(𝔎Tρ†) + M_s·log(b/ρ†)]
///            + c_gγT[(M_s−M)logρ† + R³J],
/// E₂ − E₂† = 2πρ_lR³Ṙ²(1 − R/R̄) + 4πσR̃(2R†+R̃) + 4πσ̄(R̄² − R̄†²).
pub fn total_energy(profile: &RadialProfile, eq: &EquilibriumState) -> Result<EnergyReport> {
    check_positive(profile, eq)?;
    let p = &eq.params;
    let (r_s, rho_s, m) = (eq.r_star, eq.rho_star, eq.mv.m);
    let (cg, t, gamma) = (p.c_g, p.t_inf, p.gamma);
    let r = r_s + profile.delta_r;
    let b = rho_s + profile.rho2;
    let v = profile.d_r;
    let r3 = r.powi(3);
    let m_s = profile.mass(eq);
    let log_b = (profile.rho2 / rho_s).ln_1p();
    let mut j = 0.0;
    let mut ent = 0.0;
    for (e, w) in profile.excess.iter().zip(&profile.weights) {
        let rho = rho_s + e;
        j += w * rho * (e / rho_s).ln_1p();
        ent += w * rho * rho.ln();
    }
    let e1 = 4.0 * PI * cg * t / 3.0 * b * r3 - cg * t * m_s * (p.rt() * b).ln() + cg * gamma * t * r3 * ent;
    let gap1 = 4.0 * PI * cg * t / 3.0 * rho_s * r_s.powi(3) * (log_b + 3.0 * (profile.delta_r / r_s).ln_1p()).exp_m1()
        - cg * t * ((m_s - m) * (p.rt() * rho_s).ln() + m_s * log_b)
        + cg * gamma * t * ((m_s - m) * rho_s.ln() + r3 * j);
    let shell = gap_ratio(r, eq.v_bar());
    let kinetic = 2.0 * PI * p.rho_l * r3 * v * v * shell;
    let (e2, gap2) = match eq.v_bar() {
        Some(vb) => {
            let rb = (r3 + vb).cbrt();
            let rbs = eq.rbar_star;
            let d_rbar = (r3 - r_s.powi(3)) / (rb * rb + rb * rbs + rbs * rbs);
            (
                kinetic + 4.0 * PI * (p.sigma * r * r + p.sigma_bar * rb * rb),
                kinetic
                    + 4.0 * PI * p.sigma * profile.delta_r * (2.0 * r_s + profile.delta_r)
                    + 4.0 * PI * p.sigma_bar * d_rbar * (rb + rbs),
            )
        }
        None => (
            kinetic + 4.0 * PI * p.sigma * r * r,
            kinetic + 4.0 * PI * p.sigma * profile.delta_r * (2.0 * r_s + profile.delta_r),
        ),
    };
    let (d_thermal, d_viscous) = dissipation_parts(profile, eq);
    Ok(EnergyReport {
        e: e1 + e2,
        e1,
        e2,
        d: d_thermal + d_viscous,
        d_thermal,
        d_viscous,
        gap: gap1 + gap2,
        quad_form: 0.0,
    })
}

fn dissipation_parts(profile: &RadialProfile, eq: &EquilibriumState) -> (f64, f64) {
    let p = &eq.params;
    let r = eq.r_star + profile.delta_r;
    // ∫₀¹ g y² dy = (1/4π)Σ weights·g.
    let grad: f64 = profile
        .excess
        .iter()
        .zip(&profile.slope)
        .zip(&profile.weights)
        .map(|((e, s), w)| {
            let rho = eq.rho_star + e;
            w * (s / rho).powi(2)
        })
        .sum::<f64>()
        / (4.0 * PI);
    let thermal = p.kappa * p.t_inf * 4.0 * PI * r * grad;
    let v = profile.d_r;
    let viscous = match eq.v_bar() {
        Some(vb) => 16.0 * PI * p.mu_l * vb * r * v * v / (r.powi(3) + vb),
        None => 16.0 * PI * p.mu_l * r * v * v,
    };
    (thermal, viscous)
}

/// D = κT∞·4πR∫₀¹(∂_yρ̄)²/ρ̄²·y²dy + 16πμ_lV̄RṘ²/(R³+V̄).
pub fn dissipation_rate(profile: &RadialProfile, eq: &EquilibriumState) -> f64 {
    let (a, b) = dissipation_parts(profile, eq);
    a + b
}

/// ‖(ρ̄−ρ†)/ρ†‖_∞(1 + |log ρ†|), the size measured against the working radius.
pub fn minimizer_condition(profile: &RadialProfile, eq: &EquilibriumState) -> f64 {
    let sup = profile
        .excess
        .iter()
        .fold(profile.rho2.abs(), |m, e| m.max(e.abs()))
        / eq.rho_star;
    sup * (1.0 + eq.rho_star.ln().abs())
}

/// ¼ of the quadratic lower bound:
/// ¼{Mc_gT(b/ρ† − 1 − (3/(4πρ†))∫(ρ̄−ρ†))²
///   + (ρ_lR†⁵/(4πρ†²))(1 − R†/R̄†)(∫ρ̇̄)²
///   + (𝔎TR†³/(3ρ†))∫(ρ̄−ρ†)²
///   + (R†³/(πρ†²))[σ/(2R†) + (σ̄/R̄†)(1 − R†³/(2R̄†³))](∫(ρ̄−ρ†))²}.
pub fn quadratic_form(profile: &RadialProfile, eq: &EquilibriumState, rho_dot_integral: f64) -> f64 {
    let p = &eq.params;
    let (r, rho, m) = (eq.r_star, eq.rho_star, eq.mv.m);
    let mean = profile.excess_integral;
    let t1 = m * p.c_g * p.t_inf * (profile.rho2 / rho - 3.0 / (4.0 * PI * rho) * mean).powi(2);
    let t2 = p.rho_l * r.powi(5) / (4.0 * PI * rho * rho) * gap_ratio(r, eq.v_bar()) * rho_dot_integral.powi(2);
    let t3 = p.rt() * r.powi(3) / (3.0 * rho) * profile.excess_l2();
    let ext = match eq.v_bar() {
        Some(_) => p.sigma_bar / eq.rbar_star * (1.0 - 0.5 * eq.radius_ratio().powi(3)),
        None => 0.0,
    };
    let t4 = r.powi(3) / (PI * rho * rho) * (p.sigma / (2.0 * r) + ext) * mean * mean;
    0.25 * (t1 + t2 + t3 + t4)
}

/// ∫_{B₁}ρ̇̄ from conservation of mass: d/dt(R³∫ρ̄) = 0 gives −3MṘ/R⁴.
pub fn rho_dot_integral_from_mass(profile: &RadialProfile, eq: &EquilibriumState) -> f64 {
    let r = eq.r_star + profile.delta_r;
    -3.0 * eq.mv.m * profile.d_r / r.powi(4)
}

/// (E − E†, ¼·quadratic form); refuses states outside the working radius.
pub fn minimizer_gap(
    profile: &RadialProfile,
    eq: &EquilibriumState,
    rho_dot_integral: f64,
    radius: f64,
) -> Result<(f64, f64)> {
    let cond = minimizer_condition(profile, eq);
    if cond > radius {
        return Err(BubbleError::Precondition(format!(
            "outside certified region: condition value {cond:e} exceeds working radius {radius}"
        )));
    }
    let rep = total_energy(profile, eq)?;
    Ok((rep.gap, quadratic_form(profile, eq, rho_dot_integral)))
}

/// Energy report of a modal state, with ∫ρ̇̄ taken from mass conservation.
pub fn energy_report(state: &ModalState, eq: &EquilibriumState, basis: &ModalBasis) -> Result<EnergyReport> {
    let profile = RadialProfile::from_modal(state, basis);
    let mut rep = total_energy(&profile, eq)?;
    rep.quad_form = quadratic_form(&profile, eq, rho_dot_integral_from_mass(&profile, eq));
    Ok(rep)
}

/// One static perturbation of the minimizer study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinimizerSample {
    pub eps: f64,
    pub delta: f64,
    pub condition: f64,
    pub gap: f64,
    pub quad_form: f64,
}

/// Draws `count` random mass-projected static perturbations (random mode
/// mixtures plus a radius change), each scaled to condition value `radius`·u
/// with u uniform in (0.1, 1), and evaluates both sides of the inequality.
pub fn sample_minimizer(
    eq: &EquilibriumState,
    basis: &ModalBasis,
    count: usize,
    radius: f64,
    seed: u64,
) -> Result<Vec<MinimizerSample>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let k = rng.random_range(1..=6usize);
        let shape = if rng.random_bool(0.3) { Shape::Parabolic } else { Shape::Mode(k) };
        let delta: f64 = rng.random_range(-1.0..1.0);
        let eps: f64 = rng.random_range(-1.0..1.0);
        let target = radius * rng.random_range(0.1..1.0);
        let state = scaled_static_state(eq, basis, shape, eps, delta, target)?;
        let profile = RadialProfile::from_modal(&state.1, basis);
        let condition = minimizer_condition(&profile, eq);
        let (gap, quad) = minimizer_gap(&profile, eq, 0.0, radius)?;
        out.push(MinimizerSample {
            eps: state.0.eps,
            delta: state.0.delta,
            condition,
            gap,
            quad_form: quad,
        });
    }
    Ok(out)
}

/// Scales the direction (eps, delta) so the minimizer condition equals `target`.
pub fn scaled_static_state(
    eq: &EquilibriumState,
    basis: &ModalBasis,
    shape: Shape,
    eps: f64,
    delta: f64,
    target: f64,
) -> Result<(InitialProfile, ModalState)> {
    let cond_of = |s: f64| -> Result<f64> {
        let prof = InitialProfile {
            eps: eps * s,
            delta: delta * s,
            d_r0: 0.0,
            shape,
        };
        let st = make_initial(&prof, eq, basis)?;
        Ok(minimizer_condition(&RadialProfile::from_modal(&st, basis), eq))
    };
    // The condition is close to linear in the scale; a few secant updates suffice.
    let mut s = 1e-3;
    let mut c = cond_of(s)?;
    if c == 0.0 {
        return Err(BubbleError::Numerical("degenerate perturbation direction".into()));
    }
    for _ in 0..20 {
        let next = s * target / c;
        s = next;
        c = cond_of(s)?;
        if (c - target).abs() <= 1e-10 * target {
            break;
        }
    }
    let prof = InitialProfile {
        eps: eps * s,
        delta: delta * s,
        d_r0: 0.0,
        shape,
    };
    Ok((prof, make_initial(&prof, eq, basis)?))
}

/// Centered fourth-order derivative of samples on a uniform grid, with
/// one-sided fourth-order stencils at the two ends on each side.
pub fn fd_derivative(values: &[f64], dt: f64) -> Vec<f64> {
    let n = values.len();
    let mut d = vec![0.0; n];
    if n < 5 {
        for i in 0..n {
            d[i] = match (i.checked_sub(1), (i + 1 < n).then_some(i + 1)) {
                (Some(a), Some(b)) => (values[b] - values[a]) / (2.0 * dt),
                (None, Some(b)) => (values[b] - values[i]) / dt,
                (Some(a), None) => (values[i] - values[a]) / dt,
                (None, None) => 0.0,
            };
        }
        return d;
    }
    let f = values;
    for i in 2..n - 2 {
        d[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * dt);
    }
    let fwd = |i: usize| {
        (-25.0 * f[i] + 48.0 * f[i + 1] - 36.0 * f[i + 2] + 16.0 * f[i + 3] - 3.0 * f[i + 4]) / (12.0 * dt)
    };
    let bwd = |i: usize| {
        (25.0 * f[i] - 48.0 * f[i - 1] + 36.0 * f[i - 2] - 16.0 * f[i - 3] + 3.0 * f[i - 4]) / (12.0 * dt)
    };
    d[0] = fwd(0);
    d[1] = fwd(1);
    d[n - 1] = bwd(n - 1);
    d[n - 2] = bwd(n - 2);
    d
}

/// One row of an energy audit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AuditRow {
    pub t: f64,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "D")]
    pub d: f64,
    #[serde(rename = "dEdt")]
    pub d_e_dt: f64,
    pub residual: f64,
    pub gap: f64,
    pub quad_form: f64,
}

/// Verdict of an energy audit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditVerdict {
    /// E(t_{k+1}) ≤ E(t_k) + tol at every sample.
    pub monotone: bool,
    /// max |dE/dt + D|.
    pub max_residual: f64,
    /// max |dE/dt + D| / max D.
    pub relative_residual: f64,
    /// gap ≥ quad_form − 10·rtol·|E| and quad_form ≥ 0 at every sample.
    pub coercivity_ok: bool,
    /// Tolerance used by the monotonicity test.
    pub monotone_tol: f64,
}

/// Audits sampled (t, E, gap, D, quad_form) on a uniform time grid.
///
/// dE/dt is formed from the gap column (identical derivative, no
/// cancellation); monotonicity allows increases up to 10·rtol·|E|. The
/// coercivity check allows the same slack: the gap is first order in the
/// integrator's mass defect, so a loosely integrated run can undercut the
/// (second-order) quadratic form by that much.
pub fn audit_series(
    times: &[f64],
    energy: &[f64],
    gap: &[f64],
    dissipation: &[f64],
    quad_form: &[f64],
    rtol: f64,
) -> Result<(Vec<AuditRow>, AuditVerdict)> {
    let n = times.len();
    if n < 2 || energy.len() != n || gap.len() != n || dissipation.len() != n || quad_form.len() != n {
        return Err(BubbleError::Parse("audit needs at least two aligned samples".into()));
    }
    let dt = times[1] - times[0];
    if times.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.abs().max(1e-300) + 1e-12 * w[1].abs()) {
        return Err(BubbleError::Parse("audit needs uniformly spaced samples".into()));
    }
    let dedt = fd_derivative(gap, dt);
    let mut rows = Vec::with_capacity(n);
    let mut monotone = true;
    let mut max_res: f64 = 0.0;
    let mut max_d: f64 = 0.0;
    let mut coercive = true;
    let mut tol_used: f64 = 0.0;
    for k in 0..n {
        let residual = dedt[k] + dissipation[k];
        max_res = max_res.max(residual.abs());
        max_d = max_d.max(dissipation[k].abs());
        let slack = 10.0 * rtol * energy[k].abs();
        if k > 0 {
            let tol = slack.max(10.0 * rtol * energy[k - 1].abs());
            tol_used = tol_used.max(tol);
            if gap[k] > gap[k - 1] + tol {
                monotone = false;
            }
        }
        if !(gap[k] >= quad_form[k] - slack && quad_form[k] >= 0.0) {
            coercive = false;
        }
        rows.push(AuditRow {
            t: times[k],
            e: energy[k],
            d: dissipation[k],
            d_e_dt: dedt[k],
            residual,
            gap: gap[k],
            quad_form: quad_form[k],
        });
    }
    let verdict = AuditVerdict {
        monotone,
        max_residual: max_res,
        relative_residual: if max_d > 0.0 { max_res / max_d } else { max_res },
        coercivity_ok: coercive,
        monotone_tol: tol_used,
    };
    Ok((rows, verdict))
}
