//! Time integration of the Galerkin system into sampled trajectories, and
//! decay-rate fitting.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::dynamics::{GalerkinSystem, ModalState};
use crate::energy::{quadratic_form, rho_dot_integral_from_mass, total_energy, RadialProfile};
use crate::equilibrium::EquilibriumState;
use crate::error::{BubbleError, Result};
use crate::integrator::{integrate, IntegratorOptions, IntegratorStats, OdeSystem};

impl OdeSystem for GalerkinSystem {
    fn dim(&self) -> usize {
        GalerkinSystem::dim(self)
    }

    fn rhs(&self, z: &DVector<f64>) -> Result<DVector<f64>> {
        GalerkinSystem::rhs(self, z)
    }

    fn check(&self, z: &DVector<f64>) -> Result<()> {
        self.check_validity(z).map(|_| ())
    }
}

/// Integrator tolerances plus the output cadence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationOptions {
    pub integrator: IntegratorOptions,
    /// Requested sample spacing; the actual spacing is t_end/⌈t_end/output_dt⌉
    /// so that samples are uniform and end exactly at t_end.
    pub output_dt: f64,
}

impl SimulationOptions {
    /// Options with the given tolerances and cadence.
    pub fn new(rtol: f64, atol: f64, output_dt: f64) -> Self {
        SimulationOptions {
            integrator: IntegratorOptions {
                rtol,
                atol,
                ..IntegratorOptions::default()
            },
            output_dt,
        }
    }
}

/// Uniform output grid 0 = t₀ < … < t_n = t_end.
pub fn output_times(t_end: f64, output_dt: f64) -> Result<Vec<f64>> {
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(BubbleError::field("t_end", "t_end must be positive and finite"));
    }
    if !(output_dt > 0.0) || !output_dt.is_finite() {
        return Err(BubbleError::field("output_dt", "output_dt must be positive"));
    }
    let n = ((t_end / output_dt) - 1e-9).ceil().max(1.0) as usize;
    Ok((0..=n).map(|k| t_end * k as f64 / n as f64).collect())
}

/// Sampled solution with per-sample diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ModalState>,
    /// Gas mass M[ρ,R] per sample.
    pub mass: Vec<f64>,
    /// (M[ρ,R](t) − M[ρ,R](0))/M[ρ,R](0) per sample.
    pub mass_drift: Vec<f64>,
    /// Total energy E.
    pub energy: Vec<f64>,
    /// E − E†.
    pub energy_gap: Vec<f64>,
    /// Dissipation rate D.
    pub dissipation: Vec<f64>,
    /// ¼ of the quadratic lower bound (∫ρ̇̄ from mass conservation).
    pub quad_form: Vec<f64>,
    /// ‖z‖.
    pub znorm: Vec<f64>,
    /// ‖ż‖ of the integrated state vector.
    pub dz_norm: Vec<f64>,
    pub stats: IntegratorStats,
    /// Reason for an early stop, if the validity region was left.
    pub stopped: Option<String>,
}

impl Trajectory {
    pub(crate) fn empty() -> Self {
        Trajectory {
            times: vec![],
            states: vec![],
            mass: vec![],
            mass_drift: vec![],
            energy: vec![],
            energy_gap: vec![],
            dissipation: vec![],
            quad_form: vec![],
            znorm: vec![],
            dz_norm: vec![],
            stats: IntegratorStats::default(),
            stopped: None,
        }
    }

    /// Records one sample from its radial profile and modal projection.
    pub(crate) fn push(
        &mut self,
        t: f64,
        state: ModalState,
        profile: &RadialProfile,
        eq: &EquilibriumState,
        dz_norm: f64,
    ) -> Result<()> {
        let rep = total_energy(profile, eq)?;
        let mass = profile.mass(eq);
        self.times.push(t);
        self.znorm.push(state.norm());
        self.states.push(state);
        let m0 = self.mass.first().copied().unwrap_or(mass);
        self.mass_drift.push((mass - m0) / m0);
        self.mass.push(mass);
        self.energy.push(rep.e);
        self.energy_gap.push(rep.gap);
        self.dissipation.push(rep.d);
        self.quad_form
            .push(quadratic_form(profile, eq, rho_dot_integral_from_mass(profile, eq)));
        self.dz_norm.push(dz_norm);
        Ok(())
    }

    /// Largest |mass drift| over the samples.
    pub fn max_mass_drift(&self) -> f64 {
        self.mass_drift.iter().fold(0.0, |m, d| m.max(d.abs()))
    }

    /// ‖z‖ at the last sample.
    pub fn final_norm(&self) -> f64 {
        self.znorm.last().copied().unwrap_or(0.0)
    }
}

/// Integrates the Galerkin system from `ic` to `t_end`.
///
/// Leaving the validity region ends the run early; the trajectory up to the
/// last valid sample is returned with `stopped` set.
pub fn simulate(sys: &GalerkinSystem, ic: &ModalState, t_end: f64, opts: &SimulationOptions) -> Result<Trajectory> {
    if ic.theta.len() != sys.basis.n {
        return Err(BubbleError::field(
            "theta",
            format!("initial state has {} modes, basis has {}", ic.theta.len(), sys.basis.n),
        ));
    }
    let times = output_times(t_end, opts.output_dt)?;
    let z0 = ic.to_vector();
    let mut traj = Trajectory::empty();
    let eq = sys.eq;
    let result = integrate(sys, 0.0, &z0, &times, &opts.integrator, |t, z| {
        let state = ModalState::from_vector(z);
        let dz = sys.rhs(z)?;
        let profile = RadialProfile::from_modal(&state, &sys.basis);
        traj.push(t, state, &profile, &eq, dz.norm())
    })?;
    traj.stats = result.stats;
    traj.stopped = result.stopped.map(|s| {
        log::warn!("integration stopped at t = {:e}: {}", s.t, s.error);
        s.error.to_string()
    });
    Ok(traj)
}

/// Least-squares slope of log y(t) over samples with t in [t_lo, t_hi].
pub fn fit_log_slope(times: &[f64], values: &[f64], t_lo: f64, t_hi: f64) -> Result<f64> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(t, v)| **t >= t_lo && **t <= t_hi && **v > 0.0)
        .map(|(t, v)| (*t, v.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(BubbleError::Numerical(format!(
            "only {} positive samples in the fit window [{t_lo:e}, {t_hi:e}]",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Fitted decay exponent of ‖z(t)‖ over t ∈ [3, 6]/(π²κ̄), where the
/// slowest mode dominates.
pub fn fit_decay_rate(traj: &Trajectory, eq: &EquilibriumState) -> Result<f64> {
    let scale = eq.pi2_kappa_bar();
    fit_log_slope(&traj.times, &traj.znorm, 3.0 / scale, 6.0 / scale)
}
