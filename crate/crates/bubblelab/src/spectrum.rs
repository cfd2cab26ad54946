//! The characteristic function M(λ) of the linearised operator, its zeros,
//! the rigorous decay-bound constants, and a cross-check against the dense
//! eigenvalues of the truncated operator L_N.
//!
//! Internally everything is expressed in the scaled spectral variable
//! μ = λ/(π²κ̄), in which the poles of M sit at μ = −k² (k ≥ 1) and the
//! mode series collapses to S(μ) = Σ_{k≥1} 1/(k²+μ).

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::equilibrium::{derived_constants, DerivedConstants, EquilibriumState};
use crate::error::{BubbleError, Result};
use crate::linear::{assemble_linear_with, Closure};
use crate::modal::ModalBasis;
use crate::quadrature::zeta;

/// Pole proximity guard, in units of π²κ̄.
pub const POLE_GUARD: f64 = 1e-8;

/// Roots must satisfy |M| ≤ ROOT_RESIDUAL·(local scale).
pub const ROOT_RESIDUAL: f64 = 1e-10;

/// |μ| below which S is evaluated from its Taylor series.
const SERIES_RADIUS: f64 = 1e-3;

/// |μ| below which S′ is evaluated from its Taylor series (the closed form
/// loses accuracy like 1/|μ|²).
const SERIES_RADIUS_PRIME: f64 = 0.1;

/// Taylor terms for S near 0.
const SERIES_TERMS: usize = 6;

/// Taylor terms for S′ near 0.
const SERIES_TERMS_PRIME: usize = 24;

/// Initial samples per rectangle edge in the winding computation.
const EDGE_SAMPLES: usize = 64;

/// Largest phase increment accepted between neighbouring boundary samples.
const MAX_PHASE_STEP: f64 = PI / 8.0;

/// Recursion limit when refining a boundary segment.
const MAX_EDGE_DEPTH: usize = 48;

/// Height (units of π²κ̄) of the strip around the real axis that is handled
/// by the real-axis search instead of the complex subdivision.
const REAL_STRIP: f64 = 1e-5;

/// Samples per real interval between consecutive poles.
const REAL_SAMPLES: usize = 512;

/// Newton iteration limit when polishing a root.
const NEWTON_MAX_ITER: usize = 80;

/// Taylor coefficients S(μ) = Σ_n (−μ)^n ζ(2n+2).
fn s_series(mu: Complex64, terms: usize) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut pow = Complex64::new(1.0, 0.0);
    for n in 0..terms {
        sum += pow * zeta(2 * n as u32 + 2);
        pow *= -mu;
    }
    sum
}

/// S′(μ) = Σ_{n≥1} n(−1)ⁿμ^{n−1}ζ(2n+2).
fn s_prime_series(mu: Complex64, terms: usize) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut pow = Complex64::new(1.0, 0.0);
    for n in 1..=terms {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        sum += pow * (sign * n as f64 * zeta(2 * n as u32 + 2));
        pow *= mu;
    }
    sum
}

/// (x coth x, coth x) for Re x ≥ 0, evaluated through e^{−2x} so that
/// large arguments do not overflow.
fn x_coth(x: Complex64) -> (Complex64, Complex64) {
    let e = (-2.0 * x).exp();
    let coth = (1.0 + e) / (1.0 - e);
    (x * coth, coth)
}

/// S(μ) = Σ_{k≥1} 1/(k²+μ) = (π√μ·coth(π√μ) − 1)/(2μ), with S(0) = π²/6.
///
/// The closed form is even in √μ, so the principal branch is used without
/// loss of generality.
pub fn series_s(mu: Complex64) -> Complex64 {
    if mu.norm() < SERIES_RADIUS {
        return s_series(mu, SERIES_TERMS);
    }
    let x = PI * mu.sqrt();
    let (f, _) = x_coth(x);
    (f - 1.0) / (2.0 * mu)
}

/// S′(μ) = −Σ_{k≥1} 1/(k²+μ)² = (x f′(x) − 2f(x) + 2)/(4μ²) with x = π√μ and
/// f(x) = x coth x.
pub fn series_s_prime(mu: Complex64) -> Complex64 {
    if mu.norm() < SERIES_RADIUS_PRIME {
        return s_prime_series(mu, SERIES_TERMS_PRIME);
    }
    let x = PI * mu.sqrt();
    let (f, coth) = x_coth(x);
    let fp = coth - x * (coth * coth - 1.0);
    (x * fp - 2.0 * f + 2.0) / (4.0 * mu * mu)
}

/// Distance from μ to the nearest pole −k² (k ≥ 1).
pub fn pole_distance(mu: Complex64) -> f64 {
    let k = if mu.re < 0.0 { (-mu.re).sqrt().round().max(1.0) } else { 1.0 };
    [k - 1.0, k, k + 1.0]
        .iter()
        .filter(|k| **k >= 1.0)
        .map(|k| (mu + k * k).norm())
        .fold(f64::INFINITY, f64::min)
}

/// M(λ) in the scaled variable μ = λ/(π²κ̄):
/// M = (π/(𝔎T∞γ))(4/3 + (8(γ−1)/π²)S(μ))(Cλ² + Bλ − A) + 4πρ†/R†.
#[derive(Debug, Clone, Copy)]
pub struct CharacteristicFunction {
    /// π²κ̄.
    pub unit: f64,
    /// π/(𝔎T∞γ).
    prefactor: f64,
    /// 8(γ−1)/π².
    series_weight: f64,
    /// 4πρ†/R†.
    offset: f64,
    pub constants: DerivedConstants,
}

impl CharacteristicFunction {
    pub fn new(eq: &EquilibriumState) -> Self {
        let p = &eq.params;
        CharacteristicFunction {
            unit: eq.pi2_kappa_bar(),
            prefactor: PI / (p.rt() * p.gamma),
            series_weight: 8.0 * (p.gamma - 1.0) / (PI * PI),
            offset: 4.0 * PI * eq.rho_star / eq.r_star,
            constants: derived_constants(eq),
        }
    }

    fn check_pole(&self, mu: Complex64) -> Result<()> {
        if pole_distance(mu) < POLE_GUARD {
            return Err(BubbleError::Pole(format!(
                "λ/(π²κ̄) = {} + {}i lies within {POLE_GUARD:e} of a pole",
                mu.re, mu.im
            )));
        }
        Ok(())
    }

    /// Quadratic factor Cλ² + Bλ − A and its μ-derivative.
    fn quadratic(&self, mu: Complex64) -> (Complex64, Complex64) {
        let u = self.unit;
        let dc = &self.constants;
        let lam = mu * u;
        (dc.c * lam * lam + dc.b * lam - dc.a, (2.0 * dc.c * lam + dc.b) * u)
    }

    /// M at μ.
    pub fn eval_mu(&self, mu: Complex64) -> Result<Complex64> {
        self.check_pole(mu)?;
        let (q, _) = self.quadratic(mu);
        Ok(self.prefactor * (4.0 / 3.0 + self.series_weight * series_s(mu)) * q + self.offset)
    }

    /// (M, dM/dμ) at μ.
    pub fn eval_mu_with_derivative(&self, mu: Complex64) -> Result<(Complex64, Complex64)> {
        self.check_pole(mu)?;
        let (q, dq) = self.quadratic(mu);
        let bracket = 4.0 / 3.0 + self.series_weight * series_s(mu);
        let m = self.prefactor * bracket * q + self.offset;
        let dm = self.prefactor * (self.series_weight * series_s_prime(mu) * q + bracket * dq);
        Ok((m, dm))
    }

    /// Magnitude of the terms of M at μ, used to judge residuals.
    pub fn local_scale(&self, mu: Complex64) -> f64 {
        let u = self.unit;
        let dc = &self.constants;
        let lam = (mu * u).norm();
        let q = dc.c * lam * lam + dc.b * lam + dc.a;
        let s = if pole_distance(mu) < POLE_GUARD {
            f64::INFINITY
        } else {
            // |S| bounds Σ1/|k²+μ| except for the terms at or left of the
            // nearest poles, whose signs differ from the tail.
            let kmax = (-mu.re).max(0.0).sqrt().floor() as usize + 1;
            series_s(mu).norm() + 2.0 * (1..=kmax).map(|k| 1.0 / (mu + (k * k) as f64).norm()).sum::<f64>()
        };
        self.prefactor * (4.0 / 3.0 + self.series_weight * s) * q + self.offset
    }
}

/// M(λ) for an equilibrium.
pub fn eval_m(lambda: Complex64, eq: &EquilibriumState) -> Result<Complex64> {
    let f = CharacteristicFunction::new(eq);
    f.eval_mu(lambda / f.unit)
}

/// Rectangular search region in units of π²κ̄: Re ∈ [re_min, re_max],
/// |Im| ≤ im_max.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchWindow {
    pub re_min: f64,
    pub re_max: f64,
    pub im_max: f64,
}

impl Default for SearchWindow {
    fn default() -> Self {
        SearchWindow {
            re_min: -12.0,
            re_max: -1e-12,
            im_max: 10.0,
        }
    }
}

impl SearchWindow {
    pub fn validate(&self) -> Result<()> {
        if !(self.re_min.is_finite() && self.re_max.is_finite() && self.im_max.is_finite()) {
            return Err(BubbleError::field("window", "window bounds must be finite"));
        }
        if !(self.re_min < self.re_max) || self.re_max >= 0.0 {
            return Err(BubbleError::field(
                "window",
                "window needs re_min < re_max < 0 (the left half-plane)",
            ));
        }
        if !(self.im_max > 10.0 * REAL_STRIP) {
            return Err(BubbleError::field("window", "im_max too small"));
        }
        Ok(())
    }

    /// Moves vertical edges off poles.
    fn nudged(&self) -> SearchWindow {
        let nudge = |x: f64, dir: f64| {
            let mut x = x;
            while pole_distance(Complex64::new(x, 0.0)) < 1e-6 {
                x += dir * 1e-6;
            }
            x
        };
        SearchWindow {
            re_min: nudge(self.re_min, -1.0),
            re_max: nudge(self.re_max, 1.0),
            im_max: self.im_max,
        }
    }
}

/// Root-search controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootOptions {
    pub window: SearchWindow,
    /// Maximum subdivision depth of the complex search.
    pub max_subdiv: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions {
            window: SearchWindow::default(),
            max_subdiv: 40,
        }
    }
}

/// A zero of M with its relative residual |M|/(local scale).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralRoot {
    pub re: f64,
    pub im: f64,
    pub residual: f64,
}

impl SpectralRoot {
    pub fn lambda(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// A complex number as reported in JSON.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

/// Zeros of M inside a window, in λ units (not scaled).
#[derive(Debug, Clone, Serialize)]
pub struct RootSet {
    pub roots: Vec<SpectralRoot>,
    /// Total zeros counted by the argument principle in the full window.
    pub counted: usize,
    /// Poles −π²κ̄k² inside the window.
    pub poles: usize,
    pub window: SearchWindow,
}

/// Phase change of M along the segment a→b, refined until neighbouring
/// samples differ by less than [`MAX_PHASE_STEP`] and the refinement is
/// self-consistent.
fn phase_change(
    f: &CharacteristicFunction,
    a: Complex64,
    fa: Complex64,
    b: Complex64,
    fb: Complex64,
    depth: usize,
) -> Result<f64> {
    let d = (fb / fa).arg();
    let m = 0.5 * (a + b);
    let fm = f.eval_mu(m)?;
    let split = (fm / fa).arg() + (fb / fm).arg();
    if d.abs() < MAX_PHASE_STEP && (split - d).abs() < 1e-9 {
        return Ok(d);
    }
    if depth >= MAX_EDGE_DEPTH {
        return Err(BubbleError::Unresolved(format!(
            "rectangle edge passes through a zero or pole near {} + {}i",
            m.re, m.im
        )));
    }
    Ok(phase_change(f, a, fa, m, fm, depth + 1)? + phase_change(f, m, fm, b, fb, depth + 1)?)
}

/// Winding number of M around the rectangle [x0,x1]×[y0,y1] (μ units),
/// i.e. zeros minus poles inside.
fn winding(f: &CharacteristicFunction, x0: f64, x1: f64, y0: f64, y1: f64) -> Result<i64> {
    let corners = [
        Complex64::new(x0, y0),
        Complex64::new(x1, y0),
        Complex64::new(x1, y1),
        Complex64::new(x0, y1),
    ];
    let mut total = 0.0;
    for e in 0..4 {
        let (a, b) = (corners[e], corners[(e + 1) % 4]);
        let mut prev = a;
        let mut fprev = f.eval_mu(a)?;
        for s in 1..=EDGE_SAMPLES {
            let p = a + (b - a) * (s as f64 / EDGE_SAMPLES as f64);
            let fp = f.eval_mu(p)?;
            total += phase_change(f, prev, fprev, p, fp, 0)?;
            prev = p;
            fprev = fp;
        }
    }
    let w = total / (2.0 * PI);
    let rounded = w.round();
    if (w - rounded).abs() > 0.05 {
        return Err(BubbleError::Unresolved(format!(
            "non-integer winding {w} on [{x0}, {x1}]×[{y0}, {y1}]"
        )));
    }
    Ok(rounded as i64)
}

/// Number of poles μ = −k² strictly inside (x0, x1) on the real axis.
fn poles_between(x0: f64, x1: f64) -> Vec<f64> {
    let mut out = vec![];
    let mut k = 1.0_f64;
    while -k * k > x0 {
        if -k * k < x1 {
            out.push(-k * k);
        }
        k += 1.0;
    }
    out
}

/// Safeguarded Newton on M from `start`, confined to the box `bounds`
/// (x0, x1, y0, y1). Returns `None` if the iteration leaves the box or fails.
fn newton_polish(f: &CharacteristicFunction, start: Complex64, bounds: (f64, f64, f64, f64)) -> Option<Complex64> {
    let (x0, x1, y0, y1) = bounds;
    let mut z = start;
    for _ in 0..NEWTON_MAX_ITER {
        let (m, dm) = f.eval_mu_with_derivative(z).ok()?;
        if dm.norm() == 0.0 || !dm.is_finite() {
            return None;
        }
        let step = m / dm;
        z -= step;
        if !(z.re >= x0 && z.re <= x1 && z.im >= y0 && z.im <= y1) {
            return None;
        }
        if step.norm() <= 4.0 * f64::EPSILON * z.norm().max(1.0) {
            break;
        }
    }
    let m = f.eval_mu(z).ok()?;
    (m.norm() <= ROOT_RESIDUAL * f.local_scale(z)).then_some(z)
}

/// Complex zeros in the open upper rectangle (μ units), by recursive
/// subdivision until each cell holds one zero that Newton can polish.
fn upper_roots(
    f: &CharacteristicFunction,
    cell: (f64, f64, f64, f64),
    count: i64,
    depth: usize,
    max_depth: usize,
    out: &mut Vec<Complex64>,
) -> Result<()> {
    if count <= 0 {
        return Ok(());
    }
    let (x0, x1, y0, y1) = cell;
    if count == 1 {
        let centre = Complex64::new(0.5 * (x0 + x1), 0.5 * (y0 + y1));
        if let Some(z) = newton_polish(f, centre, cell) {
            out.push(z);
            return Ok(());
        }
    }
    if depth >= max_depth {
        return Err(BubbleError::Unresolved(format!(
            "{count} zero(s) left in cell [{x0}, {x1}]×[{y0}, {y1}] after {depth} subdivisions"
        )));
    }
    // Split across the longer side; keep the cut off any pole abscissa.
    let (a, b) = if x1 - x0 >= y1 - y0 {
        let mut xm = 0.5 * (x0 + x1);
        if pole_distance(Complex64::new(xm, 0.0)) < 1e-6 {
            xm += 1e-3 * (x1 - x0);
        }
        ((x0, xm, y0, y1), (xm, x1, y0, y1))
    } else {
        let ym = 0.5 * (y0 + y1);
        ((x0, x1, y0, ym), (x0, x1, ym, y1))
    };
    let ca = winding(f, a.0, a.1, a.2, a.3)?;
    let cb = count - ca;
    upper_roots(f, a, ca, depth + 1, max_depth, out)?;
    upper_roots(f, b, cb, depth + 1, max_depth, out)
}

/// Real M on the real axis.
fn real_m(f: &CharacteristicFunction, x: f64) -> Result<f64> {
    Ok(f.eval_mu(Complex64::new(x, 0.0))?.re)
}

/// Refines a sign-change bracket [a, b] of real M to a root by bisection
/// with Newton acceleration.
fn polish_real(f: &CharacteristicFunction, mut a: f64, mut b: f64) -> Result<f64> {
    let mut fa = real_m(f, a)?;
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        let (m, dm) = f.eval_mu_with_derivative(Complex64::new(x, 0.0))?;
        let (m, dm) = (m.re, dm.re);
        if m == 0.0 {
            return Ok(x);
        }
        if (m > 0.0) == (fa > 0.0) {
            a = x;
            fa = m;
        } else {
            b = x;
        }
        let tol = 4.0 * f64::EPSILON * x.abs().max(1.0);
        if (m / dm).abs() <= tol || (b - a).abs() <= tol {
            return Ok(x);
        }
        let newton = x - m / dm;
        x = if dm != 0.0 && newton > a.min(b) && newton < a.max(b) { newton } else { 0.5 * (a + b) };
    }
    Ok(x)
}

/// Real zeros in [x0, x1] (μ units), scanning each interval between poles.
fn real_roots(f: &CharacteristicFunction, x0: f64, x1: f64) -> Result<Vec<f64>> {
    let mut edges = vec![x0];
    edges.extend(poles_between(x0, x1).into_iter().rev());
    edges.push(x1);
    edges.sort_by(f64::total_cmp);
    let mut out = vec![];
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let mut prev: Option<(f64, f64)> = None;
        for s in 0..=REAL_SAMPLES {
            // Cosine clustering towards both ends, where poles live.
            let t = 0.5 * (1.0 - (PI * s as f64 / REAL_SAMPLES as f64).cos());
            let x = lo + (hi - lo) * t;
            if pole_distance(Complex64::new(x, 0.0)) < 1e3 * POLE_GUARD {
                continue;
            }
            let m = real_m(f, x)?;
            if let Some((xp, mp)) = prev {
                if m == 0.0 {
                    out.push(x);
                } else if (m > 0.0) != (mp > 0.0) && mp != 0.0 {
                    out.push(polish_real(f, xp, x)?);
                }
            }
            prev = Some((x, m));
        }
    }
    Ok(out)
}

/// Zeros of M inside the window, with argument-principle certification
/// that none were missed.
pub fn find_roots(eq: &EquilibriumState, opts: &RootOptions) -> Result<RootSet> {
    opts.window.validate()?;
    let f = CharacteristicFunction::new(eq);
    let w = opts.window.nudged();
    let poles = poles_between(w.re_min, w.re_max).len() as i64;
    let total = winding(&f, w.re_min, w.re_max, -w.im_max, w.im_max)? + poles;
    if total < 0 {
        return Err(BubbleError::Inconsistent(format!("negative zero count {total}")));
    }
    let reals = real_roots(&f, w.re_min, w.re_max)?;
    let upper_count = winding(&f, w.re_min, w.re_max, REAL_STRIP, w.im_max)?;
    let mut upper = vec![];
    upper_roots(
        &f,
        (w.re_min, w.re_max, REAL_STRIP, w.im_max),
        upper_count,
        0,
        opts.max_subdiv,
        &mut upper,
    )?;
    let found = reals.len() as i64 + 2 * upper.len() as i64;
    if found != total {
        return Err(BubbleError::Unresolved(format!(
            "window holds {total} zeros but {} real and {} conjugate pairs were resolved",
            reals.len(),
            upper.len()
        )));
    }
    let unit = f.unit;
    let mut roots = vec![];
    let mut push = |z: Complex64| {
        let residual = f.eval_mu(z).map(|m| m.norm() / f.local_scale(z)).unwrap_or(f64::INFINITY);
        roots.push(SpectralRoot {
            re: z.re * unit,
            im: z.im * unit,
            residual,
        });
    };
    for x in reals {
        push(Complex64::new(x, 0.0));
    }
    for z in upper {
        push(z);
        push(z.conj());
    }
    roots.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    for r in &roots {
        if !(r.residual <= ROOT_RESIDUAL) {
            return Err(BubbleError::Unresolved(format!(
                "root {} + {}i has residual {:e}",
                r.re, r.im, r.residual
            )));
        }
    }
    Ok(RootSet {
        roots,
        counted: total as usize,
        poles: poles as usize,
        window: w,
    })
}

/// Which branch of the decay-bound formula applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DampingCase {
    /// B² ≤ 4KC².
    Underdamped,
    /// B² > 4KC².
    Overdamped,
}

/// Rigorous decay-bound constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayBounds {
    #[serde(rename = "Theta1")]
    pub theta1: f64,
    #[serde(rename = "Theta2")]
    pub theta2: f64,
    /// Every nonzero eigenvalue has Re < −2ϖ.
    pub varpi: f64,
    pub case: DampingCase,
    /// The ratio r = (γ−1)/(3𝔎T∞γρ†/(R†(KC+A)) − 1); Θ₂ = 1 − r, Θ₁ = 1 − √r.
    pub ratio: f64,
}

/// Θ₁, Θ₂ and ϖ of an equilibrium in a finite liquid shell.
///
/// For an unbounded liquid KC + A = 3𝔎T∞ρ†/R† exactly, the ratio equals 1
/// and the bounds degenerate to zero, so a finite volume is required.
pub fn decay_bounds(eq: &EquilibriumState) -> Result<DecayBounds> {
    if eq.v_bar().is_none() {
        return Err(BubbleError::Precondition(
            "decay bounds require a finite liquid volume".into(),
        ));
    }
    let dc = derived_constants(eq);
    let p = &eq.params;
    let unit = eq.pi2_kappa_bar();
    let kca = dc.k * dc.c + dc.a;
    let ratio = (p.gamma - 1.0) / (3.0 * p.rt() * p.gamma * eq.rho_star / (eq.r_star * kca) - 1.0);
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(BubbleError::Inconsistent(format!(
            "decay-bound ratio {ratio} outside (0, 1); KC + A = {kca:e}"
        )));
    }
    let theta2 = 1.0 - ratio;
    let theta1 = 1.0 - ratio.sqrt();
    let disc = dc.b * dc.b - 4.0 * dc.k * dc.c * dc.c;
    let (varpi, case) = if disc <= 0.0 {
        let inner = (theta1 * unit).min((0.5 * dc.k).sqrt());
        (0.5 * (theta2 * unit).min((dc.b / (2.0 * dc.c)).max(inner)), DampingCase::Underdamped)
    } else {
        let root = 2.0 * dc.k * dc.c / (dc.b + disc.sqrt());
        (0.5 * (theta2 * unit).min(root), DampingCase::Overdamped)
    };
    Ok(DecayBounds {
        theta1,
        theta2,
        varpi,
        case,
        ratio,
    })
}

/// Result of comparing the roots of M with the eigenvalues of L_N.
#[derive(Debug, Clone, Serialize)]
pub struct MatrixCheck {
    pub n: usize,
    pub closure: Closure,
    /// Nonzero eigenvalues of L_N inside the window, in λ units.
    pub eigs_window: Vec<ComplexValue>,
    /// Eigenvalues with |λ| ≤ 1e−10·π²κ̄.
    pub zero_count: usize,
    /// max over roots of the distance to the nearest eigenvalue, in units of π²κ̄.
    pub max_distance: f64,
    /// Largest real part over the nonzero eigenvalues, in λ units.
    pub abscissa: f64,
}

/// Dense eigenvalues of L_N compared against a set of roots.
pub fn matrix_check(eq: &EquilibriumState, n: usize, closure: Closure, roots: &RootSet) -> Result<MatrixCheck> {
    let basis = ModalBasis::new(eq, n)?;
    let l: DMatrix<f64> = assemble_linear_with(eq, &basis, closure);
    let unit = eq.pi2_kappa_bar();
    let eigs: Vec<Complex64> = l
        .complex_eigenvalues()
        .iter()
        .map(|z| Complex64::new(z.re / unit, z.im / unit))
        .collect();
    let zero_count = eigs.iter().filter(|z| z.norm() <= 1e-10).count();
    let nonzero: Vec<Complex64> = eigs.iter().copied().filter(|z| z.norm() > 1e-10).collect();
    let w = roots.window;
    let mut eigs_window: Vec<ComplexValue> = nonzero
        .iter()
        .filter(|z| z.re >= w.re_min && z.re <= w.re_max && z.im.abs() <= w.im_max)
        .map(|z| ComplexValue {
            re: z.re * unit,
            im: z.im * unit,
        })
        .collect();
    eigs_window.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    let max_distance = roots
        .roots
        .iter()
        .map(|r| {
            let mu = r.lambda() / unit;
            nonzero.iter().map(|z| (z - mu).norm()).fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    let abscissa = nonzero.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max) * unit;
    Ok(MatrixCheck {
        n,
        closure,
        eigs_window,
        zero_count,
        max_distance,
        abscissa,
    })
}

/// Controls for a full spectral report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumOptions {
    #[serde(flatten)]
    pub roots: RootOptions,
    /// Mode count of the matrix cross-check.
    pub n: usize,
    pub closure: Closure,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            roots: RootOptions::default(),
            n: 128,
            closure: Closure::ResidualMode,
        }
    }
}

/// Bound constants as reported.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumConstants {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "K")]
    pub k: f64,
    /// Θ₁, Θ₂, ϖ and the damping case are absent for an unbounded liquid.
    #[serde(rename = "Theta1")]
    pub theta1: Option<f64>,
    #[serde(rename = "Theta2")]
    pub theta2: Option<f64>,
    pub varpi: Option<f64>,
    pub case: Option<DampingCase>,
    /// Measured Θ₀ = −abscissa/(π²κ̄).
    #[serde(rename = "Theta0")]
    pub theta0: f64,
    /// Whether Θ₁ ≤ Θ₀ ≤ Θ₂.
    #[serde(rename = "Theta0_in_bounds")]
    pub theta0_in_bounds: bool,
}

/// Certification of the gap (−π²κ̄, −Θ₀π²κ̄) containing the leading real root.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapCertificate {
    pub lo: f64,
    pub hi: f64,
    /// A real root lies in (−π²κ̄, 0), it attains the abscissa, and Θ₀ ∈ (0, 1).
    pub certified: bool,
    /// The real root in (−π²κ̄, 0), if any.
    pub real_root: Option<f64>,
}

/// Everything the spectral analysis reports for one equilibrium.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub pi2_kappa_bar: f64,
    pub roots: Vec<SpectralRoot>,
    pub zero_count: usize,
    /// Largest real part over the nonzero spectrum found in the window.
    pub abscissa: f64,
    pub predicted_rate: f64,
    pub constants: SpectrumConstants,
    pub gap: GapCertificate,
    pub matrix_eigs_window: Vec<ComplexValue>,
    pub matrix_n: usize,
    pub matrix_closure: Closure,
    /// Largest root-to-eigenvalue distance in units of π²κ̄.
    pub matrix_max_distance: f64,
    pub matrix_abscissa: f64,
    /// abscissa < −2ϖ (absent for an unbounded liquid).
    pub bound_holds: Option<bool>,
}

/// Roots, bounds, gap certificate and matrix cross-check for an equilibrium.
pub fn spectrum_report(eq: &EquilibriumState, opts: &SpectrumOptions) -> Result<SpectrumReport> {
    let set = find_roots(eq, &opts.roots)?;
    let bounds = match eq.v_bar() {
        Some(_) => Some(decay_bounds(eq)?),
        None => None,
    };
    let check = matrix_check(eq, opts.n, opts.closure, &set)?;
    let unit = eq.pi2_kappa_bar();
    let abscissa = set
        .roots
        .first()
        .map(|r| r.re)
        .ok_or_else(|| BubbleError::Unresolved("no zero of M in the search window; widen it".into()))?;
    if !(abscissa < 0.0) {
        return Err(BubbleError::Inconsistent(format!("nonnegative abscissa {abscissa:e}")));
    }
    let theta0 = -abscissa / unit;
    let real_root = set
        .roots
        .iter()
        .find(|r| r.im == 0.0 && r.re > -unit && r.re < 0.0)
        .map(|r| r.re);
    let gap = GapCertificate {
        lo: -unit,
        hi: -theta0 * unit,
        certified: real_root.is_some_and(|x| x == abscissa) && theta0 > 0.0 && theta0 < 1.0,
        real_root,
    };
    let dc = &CharacteristicFunction::new(eq).constants;
    Ok(SpectrumReport {
        pi2_kappa_bar: unit,
        zero_count: check.zero_count,
        abscissa,
        predicted_rate: -abscissa,
        constants: SpectrumConstants {
            a: dc.a,
            b: dc.b,
            c: dc.c,
            k: dc.k,
            theta1: bounds.map(|b| b.theta1),
            theta2: bounds.map(|b| b.theta2),
            varpi: bounds.map(|b| b.varpi),
            case: bounds.map(|b| b.case),
            theta0,
            theta0_in_bounds: bounds.is_some_and(|b| theta0 >= b.theta1 && theta0 <= b.theta2),
        },
        gap,
        bound_holds: bounds.map(|b| abscissa < -2.0 * b.varpi),
        roots: set.roots,
        matrix_eigs_window: check.eigs_window,
        matrix_n: check.n,
        matrix_closure: check.closure,
        matrix_max_distance: check.max_distance,
        matrix_abscissa: check.abscissa,
    })
}

/// One member of an equilibrium family in a rate-scaling study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingRow {
    pub m: f64,
    pub t_inf: f64,
    pub r_star: f64,
    pub rho_star: f64,
    pub kappa_bar: f64,
    pub pi2_kappa_bar: f64,
    pub abscissa: f64,
    pub varpi: Option<f64>,
}

/// π²κ̄, abscissa and ϖ along a family of equilibria.
pub fn rate_scaling(family: &[EquilibriumState], opts: &RootOptions) -> Result<Vec<ScalingRow>> {
    family
        .iter()
        .map(|eq| {
            let set = find_roots(eq, opts)?;
            let abscissa = set
                .roots
                .first()
                .map(|r| r.re)
                .ok_or_else(|| BubbleError::Unresolved("no zero of M in the search window".into()))?;
            Ok(ScalingRow {
                m: eq.mv.m,
                t_inf: eq.params.t_inf,
                r_star: eq.r_star,
                rho_star: eq.rho_star,
                kappa_bar: eq.kappa_bar,
                pi2_kappa_bar: eq.pi2_kappa_bar(),
                abscissa,
                varpi: match eq.v_bar() {
                    Some(_) => Some(decay_bounds(eq)?.varpi),
                    None => None,
                },
            })
        })
        .collect()
}
