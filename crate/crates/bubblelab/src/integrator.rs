//! Adaptive TR-BDF2 (an L-stable, stiffly accurate ESDIRK of order 2 with
//! an embedded third-order solution) for stiff autonomous systems ż = f(z).
//!
//! Stage equations are solved by simplified Newton with a Jacobian that is
//! refreshed only when the iteration stalls; the iteration matrix
//! I − h·d·J is factored once per (h, J) pair. Output at requested times is
//! produced by cubic Hermite interpolation over the accepted step.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{BubbleError, Result};

/// Diagonal coefficient d = γ/2 with γ = 2 − √2.
const GAMMA: f64 = 2.0 - std::f64::consts::SQRT_2;
const D: f64 = GAMMA / 2.0;
/// Weight w = √2/4 of the first two stages in the final stage.
const W: f64 = std::f64::consts::SQRT_2 / 4.0;
/// Embedded third-order weights.
const BHAT: [f64; 3] = [(1.0 - W) / 3.0, (3.0 * W + 1.0) / 3.0, D / 3.0];
/// Propagating (second-order) weights, equal to the last row of A.
const B: [f64; 3] = [W, W, D];

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;
/// Step-size changes inside [1, HYSTERESIS) are suppressed to reuse the LU.
const HYSTERESIS: f64 = 1.5;
const NEWTON_MAX_ITER: usize = 8;
/// Cap on span/h in per-unit-step control.
const MAX_UNIT_STEP_GAIN: f64 = 1e6;
/// Required Newton accuracy in the weighted RMS norm (1 = tolerance).
const NEWTON_TOL: f64 = 0.01;

/// An autonomous system ż = f(z).
pub trait OdeSystem {
    /// State dimension.
    fn dim(&self) -> usize;

    /// Right-hand side; errors abort the step (the step is retried smaller).
    fn rhs(&self, z: &DVector<f64>) -> Result<DVector<f64>>;

    /// Jacobian ∂f/∂z; the default is a forward difference.
    fn jacobian(&self, z: &DVector<f64>) -> Result<DMatrix<f64>> {
        fd_jacobian(|x| self.rhs(x), z)
    }

    /// Acceptance check applied to every accepted state.
    fn check(&self, _z: &DVector<f64>) -> Result<()> {
        Ok(())
    }
}

/// Forward-difference Jacobian with steps √ε·max(|z_j|, 1e−8).
pub fn fd_jacobian<F>(f: F, z: &DVector<f64>) -> Result<DMatrix<f64>>
where
    F: Fn(&DVector<f64>) -> Result<DVector<f64>>,
{
    let n = z.len();
    let f0 = f(z)?;
    let mut jac = DMatrix::zeros(n, n);
    let mut x = z.clone();
    for j in 0..n {
        let h = f64::EPSILON.sqrt() * z[j].abs().max(1e-8);
        x[j] = z[j] + h;
        let fj = f(&x)?;
        x[j] = z[j];
        jac.set_column(j, &((fj - &f0) / h));
    }
    Ok(jac)
}

/// How the local error estimate is compared with the tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorControl {
    /// Local error per step ≤ tol (global error ∝ tol^{2/3}).
    #[default]
    PerStep,
    /// Local error per unit step ≤ tol, time measured in units of the whole
    /// integration interval (global error and defect ∝ tol).
    PerUnitStep,
}

/// Integration options.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Error-control mode.
    #[serde(default)]
    pub control: ErrorControl,
    /// Initial step (chosen automatically when `None`).
    pub h0: Option<f64>,
    /// Largest step allowed.
    pub h_max: f64,
    /// Step budget.
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            rtol: 1e-8,
            atol: 1e-12,
            control: ErrorControl::PerStep,
            h0: None,
            h_max: f64::INFINITY,
            max_steps: 1_000_000,
        }
    }
}

impl IntegratorOptions {
    /// Validates tolerances and step limits.
    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.rtol < 1.0) {
            return Err(BubbleError::field("rtol", "rtol must lie in (0, 1)"));
        }
        if !(self.atol > 0.0) || !self.atol.is_finite() {
            return Err(BubbleError::field("atol", "atol must be positive"));
        }
        if !(self.h_max > 0.0) {
            return Err(BubbleError::field("h_max", "h_max must be positive"));
        }
        if let Some(h) = self.h0 {
            if !(h > 0.0) || !h.is_finite() {
                return Err(BubbleError::field("h0", "h0 must be positive"));
            }
        }
        Ok(())
    }
}

/// Work counters of one integration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct IntegratorStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
    pub jacobians: usize,
    pub factorizations: usize,
    pub newton_failures: usize,
}

/// Why an integration stopped before `t_end`.
#[derive(Debug, Clone)]
pub struct EarlyStop {
    /// Last accepted time.
    pub t: f64,
    /// Cause.
    pub error: BubbleError,
}

/// Result of [`integrate`].
#[derive(Debug, Clone)]
pub struct IntegrationResult {
    pub stats: IntegratorStats,
    /// Final accepted time and state.
    pub t: f64,
    pub z: DVector<f64>,
    /// Set when the run ended at an accepted state that failed
    /// [`OdeSystem::check`]; the remaining outputs were not produced.
    pub stopped: Option<EarlyStop>,
}

fn wrms(v: &DVector<f64>, scale: &DVector<f64>) -> f64 {
    let n = v.len().max(1) as f64;
    (v.iter().zip(scale.iter()).map(|(x, s)| (x / s).powi(2)).sum::<f64>() / n).sqrt()
}

struct Solver<'a, S: OdeSystem> {
    sys: &'a S,
    opts: IntegratorOptions,
    /// Length of the integration interval (time unit for per-unit-step control).
    span: f64,
    stats: IntegratorStats,
    jac: DMatrix<f64>,
    /// Whether `jac` was evaluated at the current step's starting state.
    jac_fresh: bool,
    lu: Option<(f64, nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>)>,
}

enum StepOutcome {
    Accepted {
        z: DVector<f64>,
        k3: DVector<f64>,
        err: f64,
    },
    Rejected {
        err: f64,
    },
    /// Stage iteration failed, possibly because f raised an error.
    NewtonFailed(Option<BubbleError>),
}

impl<S: OdeSystem> Solver<'_, S> {
    fn rhs(&mut self, z: &DVector<f64>) -> Result<DVector<f64>> {
        self.stats.rhs_evals += 1;
        self.sys.rhs(z)
    }

    fn refresh_jacobian(&mut self, z: &DVector<f64>) -> Result<()> {
        self.jac = self.sys.jacobian(z)?;
        self.stats.jacobians += 1;
        self.jac_fresh = true;
        self.lu = None;
        Ok(())
    }

    fn factor(&mut self, h: f64) -> Result<()> {
        if let Some((hl, _)) = &self.lu {
            if *hl == h {
                return Ok(());
            }
        }
        let n = self.jac.nrows();
        let m = DMatrix::identity(n, n) - &self.jac * (h * D);
        let lu = m.lu();
        if !lu.is_invertible() {
            return Err(BubbleError::Singular(format!(
                "iteration matrix I - h*d*J is singular at h = {h:e}"
            )));
        }
        self.stats.factorizations += 1;
        self.lu = Some((h, lu));
        Ok(())
    }

    fn solve(&self, v: &DVector<f64>) -> DVector<f64> {
        let (_, lu) = self.lu.as_ref().expect("iteration matrix factored");
        lu.solve(v).expect("factorization is invertible")
    }

    /// Solves Z = known + h·d·f(Z); returns (Z, f(Z)) or, on failure, the
    /// right-hand-side error that stopped the iteration (if any).
    fn newton(
        &mut self,
        known: &DVector<f64>,
        guess: DVector<f64>,
        h: f64,
        scale: &DVector<f64>,
    ) -> Result<std::result::Result<(DVector<f64>, DVector<f64>), Option<BubbleError>>> {
        let mut zs = guess;
        let mut prev: Option<f64> = None;
        for _ in 0..NEWTON_MAX_ITER {
            let f = match self.rhs(&zs) {
                Ok(f) => f,
                Err(e) => return Ok(Err(Some(e))),
            };
            let res = &zs - known - &f * (h * D);
            let delta = self.solve(&res);
            zs -= &delta;
            let nd = wrms(&delta, scale);
            if !nd.is_finite() {
                return Ok(Err(None));
            }
            if let Some(p) = prev {
                let rate = nd / p;
                // Increments below the target are accepted even when the
                // observed rate is noisy (round-off floor of f).
                if nd <= NEWTON_TOL {
                    let k = (&zs - known) / (h * D);
                    return Ok(Ok((zs, k)));
                }
                if rate >= 0.9 {
                    return Ok(Err(None));
                }
                if nd * rate / (1.0 - rate) <= NEWTON_TOL {
                    let k = (&zs - known) / (h * D);
                    return Ok(Ok((zs, k)));
                }
            } else if nd <= 1e-3 * NEWTON_TOL {
                let k = (&zs - known) / (h * D);
                return Ok(Ok((zs, k)));
            }
            prev = Some(nd);
        }
        Ok(Err(None))
    }

    fn step(&mut self, z: &DVector<f64>, k1: &DVector<f64>, h: f64) -> Result<StepOutcome> {
        self.factor(h)?;
        let scale = z.map(|x| self.opts.atol + self.opts.rtol * x.abs());
        // Stage 2 (trapezoidal part).
        let known2 = z + k1 * (h * D);
        let guess2 = z + k1 * (h * GAMMA);
        let (_, k2) = match self.newton(&known2, guess2, h, &scale)? {
            Ok(v) => v,
            Err(e) => return Ok(StepOutcome::NewtonFailed(e)),
        };
        // Stage 3 (BDF2 part); guess from quadratic extrapolation of the stages.
        let known3 = z + (k1 + &k2) * (h * W);
        let guess3 = z + (k1 * (1.0 - 1.0 / (2.0 * GAMMA)) + &k2 * (1.0 / (2.0 * GAMMA))) * h;
        let (z3, k3) = match self.newton(&known3, guess3, h, &scale)? {
            Ok(v) => v,
            Err(e) => return Ok(StepOutcome::NewtonFailed(e)),
        };
        let raw = (k1 * (B[0] - BHAT[0]) + &k2 * (B[1] - BHAT[1]) + &k3 * (B[2] - BHAT[2])) * h;
        let filtered = self.solve(&raw);
        let sc = DVector::from_iterator(
            z.len(),
            z.iter()
                .zip(z3.iter())
                .map(|(a, b)| self.opts.atol + self.opts.rtol * a.abs().max(b.abs())),
        );
        let err = match self.opts.control {
            ErrorControl::PerStep => wrms(&filtered, &sc),
            // The amplification is capped so the round-off floor of the
            // estimate cannot force h to zero.
            ErrorControl::PerUnitStep => wrms(&filtered, &sc) * (self.span / h).min(MAX_UNIT_STEP_GAIN),
        };
        if err <= 1.0 {
            Ok(StepOutcome::Accepted { z: z3, k3, err })
        } else {
            Ok(StepOutcome::Rejected { err })
        }
    }
}

/// Cubic Hermite interpolant on [t0, t0+h].
fn hermite(
    t0: f64,
    h: f64,
    z0: &DVector<f64>,
    f0: &DVector<f64>,
    z1: &DVector<f64>,
    f1: &DVector<f64>,
    t: f64,
) -> DVector<f64> {
    let s = (t - t0) / h;
    let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    let h10 = s * (1.0 - s) * (1.0 - s);
    let h01 = s * s * (3.0 - 2.0 * s);
    let h11 = s * s * (s - 1.0);
    z0 * h00 + f0 * (h10 * h) + z1 * h01 + f1 * (h11 * h)
}

/// Integrates from (t0, z0) to the last of `outputs` (sorted, ≥ t0), calling
/// `observer(t, z)` at every output time.
///
/// A state that fails [`OdeSystem::check`] ends the run early with
/// `stopped` set; step-size underflow and the step budget are errors.
pub fn integrate<S, O>(
    sys: &S,
    t0: f64,
    z0: &DVector<f64>,
    outputs: &[f64],
    opts: &IntegratorOptions,
    mut observer: O,
) -> Result<IntegrationResult>
where
    S: OdeSystem,
    O: FnMut(f64, &DVector<f64>) -> Result<()>,
{
    opts.validate()?;
    if outputs.windows(2).any(|w| !(w[1] > w[0])) || outputs.first().is_some_and(|&t| t < t0) {
        return Err(BubbleError::field(
            "output_dt",
            "output times must be strictly increasing and not before t0",
        ));
    }
    sys.check(z0)?;
    let mut solver = Solver {
        sys,
        opts: *opts,
        span: outputs.last().map_or(1.0, |&t| (t - t0).max(f64::MIN_POSITIVE)),
        stats: IntegratorStats::default(),
        jac: DMatrix::zeros(0, 0),
        jac_fresh: false,
        lu: None,
    };
    let mut t = t0;
    let mut z = z0.clone();
    let mut last_rhs_error: Option<BubbleError> = None;
    let expo = match opts.control {
        ErrorControl::PerStep => -1.0 / 3.0,
        ErrorControl::PerUnitStep => -1.0 / 2.0,
    };
    let mut next_out = 0;
    while next_out < outputs.len() && outputs[next_out] <= t0 {
        observer(t0, &z)?;
        next_out += 1;
    }
    let Some(&t_end) = outputs.last() else {
        return Ok(IntegrationResult {
            stats: solver.stats,
            t,
            z,
            stopped: None,
        });
    };
    let mut k1 = solver.rhs(&z)?;
    solver.refresh_jacobian(&z)?;
    let scale = z.map(|x| opts.atol + opts.rtol * x.abs());
    let mut h = match opts.h0 {
        Some(h) => h,
        None => {
            // 0.01‖z‖/‖f‖ in the weighted norm, kept above 1e−8 of the span:
            // the implicit stages tolerate a large first step and the
            // controller rejects it if needed.
            let span = t_end - t0;
            let nz = wrms(&z, &scale);
            let nf = wrms(&k1, &scale);
            if nf > 0.0 && nz > 0.0 {
                (0.01 * nz / nf).clamp(1e-8 * span, span)
            } else {
                1e-3 * span
            }
        }
    }
    .min(opts.h_max)
    .min(t_end - t0);

    while t < t_end {
        if solver.stats.accepted + solver.stats.rejected >= opts.max_steps {
            return Err(BubbleError::Numerical(format!(
                "step budget of {} exhausted at t = {t:e}",
                opts.max_steps
            )));
        }
        let last = t + h >= t_end * (1.0 - 4.0 * f64::EPSILON) || t + h >= t_end;
        if last {
            h = t_end - t;
        }
        if h < 1e-14 * t.abs().max(1.0) {
            // Stages that keep leaving the admissible set mean the trajectory
            // itself is leaving it: report an early stop, not an underflow.
            if let Some(error) = last_rhs_error {
                return Ok(IntegrationResult {
                    stats: solver.stats,
                    t,
                    z,
                    stopped: Some(EarlyStop { t, error }),
                });
            }
            return Err(BubbleError::StepUnderflow { t, h });
        }
        match solver.step(&z, &k1, h)? {
            StepOutcome::NewtonFailed(e) => {
                solver.stats.newton_failures += 1;
                if e.is_some() {
                    last_rhs_error = e;
                }
                if solver.jac_fresh {
                    h *= 0.25;
                } else {
                    solver.refresh_jacobian(&z)?;
                }
            }
            StepOutcome::Rejected { err } => {
                solver.stats.rejected += 1;
                let fac = (SAFETY * err.powf(expo)).clamp(FAC_MIN, 1.0);
                h *= fac;
            }
            StepOutcome::Accepted { z: z_new, k3, err } => {
                let t_new = if last { t_end } else { t + h };
                if let Err(e) = sys.check(&z_new) {
                    return Ok(IntegrationResult {
                        stats: solver.stats,
                        t,
                        z,
                        stopped: Some(EarlyStop { t: t_new, error: e }),
                    });
                }
                solver.stats.accepted += 1;
                last_rhs_error = None;
                while next_out < outputs.len() && outputs[next_out] <= t_new {
                    let to = outputs[next_out];
                    let zo = if to == t_new {
                        z_new.clone()
                    } else {
                        hermite(t, t_new - t, &z, &k1, &z_new, &k3, to)
                    };
                    observer(to, &zo)?;
                    next_out += 1;
                }
                t = t_new;
                z = z_new;
                k1 = k3;
                solver.jac_fresh = false;
                let fac = if err > 0.0 {
                    (SAFETY * err.powf(expo)).clamp(FAC_MIN, FAC_MAX)
                } else {
                    FAC_MAX
                };
                let h_new = (h * fac).min(opts.h_max);
                if !(h_new >= h && h_new < HYSTERESIS * h) {
                    h = h_new;
                }
            }
        }
    }
    Ok(IntegrationResult {
        stats: solver.stats,
        t,
        z,
        stopped: None,
    })
}
