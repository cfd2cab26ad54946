//! Run configuration shared by the front ends: one JSON document holding the
//! parameter block, the problem (M, V), solver, initial-condition, spectrum
//! and sweep settings, and the seed for randomized audits.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::dynamics::{make_initial, make_initial_with_norm, slow_mode_initial, Formulation, GalerkinSystem, InitialProfile, ModalState, Shape};
use crate::equilibrium::{solve_radius, solve_with_volume_ratio, EquilibriumState};
use crate::error::{BubbleError, Result};
use crate::fd::{fd_oracle, FdSystem};
use crate::integrator::{ErrorControl, IntegratorOptions};
use crate::linear::Closure;
use crate::modal::ModalBasis;
use crate::params::{params_from_json, Volume};
use crate::simulate::{simulate, SimulationOptions, Trajectory};
use crate::spectrum::{RootOptions, SearchWindow, SpectrumOptions};

/// Default simulated time in units of 1/(π²κ̄).
pub const DEFAULT_T_END_UNITS: f64 = 6.0;

/// Default output spacing in units of 1/(π²κ̄).
pub const DEFAULT_OUTPUT_DT_UNITS: f64 = 0.02;

/// Gas mass and liquid volume; the volume is given either directly (`V`, a
/// number or "inf") or as the ratio V̄/R†³ (`V_ratio`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "V", default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Volume>,
    #[serde(rename = "V_ratio", default, skip_serializing_if = "Option::is_none")]
    pub v_ratio: Option<f64>,
}

/// Which discretization `simulate` integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    #[default]
    Galerkin,
    Fd,
}

fn default_n() -> usize {
    64
}
fn default_rtol() -> f64 {
    1e-8
}
fn default_atol() -> f64 {
    1e-12
}
fn default_grid() -> usize {
    512
}

/// Solver settings. `t_end` and `output_dt` default to 6/(π²κ̄) and
/// 0.02/(π²κ̄).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(rename = "N", default = "default_n")]
    pub n: usize,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
    #[serde(default)]
    pub t_end: Option<f64>,
    #[serde(default)]
    pub output_dt: Option<f64>,
    #[serde(default)]
    pub backend: Backend,
    /// Grid intervals of the finite-difference backend.
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default)]
    pub formulation: Formulation,
    #[serde(default)]
    pub control: ErrorControl,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            n: default_n(),
            rtol: default_rtol(),
            atol: default_atol(),
            t_end: None,
            output_dt: None,
            backend: Backend::default(),
            grid: default_grid(),
            formulation: Formulation::default(),
            control: ErrorControl::default(),
        }
    }
}

fn default_eps() -> f64 {
    0.01
}
fn default_shape() -> String {
    "parabolic".into()
}

/// Initial condition. `shape` is "parabolic", "mode-k", or "slow-mode" (the
/// slowest decaying eigenvector of L_N, mass-corrected; requires `norm`).
/// If `norm` is given, eps/delta/dR0 are rescaled together so ‖z₀‖ = norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IcConfig {
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default)]
    pub delta: f64,
    #[serde(rename = "dR0", default)]
    pub d_r0: f64,
    #[serde(default = "default_shape")]
    pub shape: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm: Option<f64>,
}

impl Default for IcConfig {
    fn default() -> Self {
        IcConfig {
            eps: default_eps(),
            delta: 0.0,
            d_r0: 0.0,
            shape: default_shape(),
            norm: None,
        }
    }
}

fn default_subdiv() -> usize {
    RootOptions::default().max_subdiv
}
fn default_spectrum_n() -> usize {
    128
}
fn default_closure() -> Closure {
    Closure::ResidualMode
}

/// Spectrum settings; the window is in units of π²κ̄.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    #[serde(default)]
    pub window: SearchWindow,
    #[serde(default = "default_subdiv")]
    pub max_subdiv: usize,
    /// Mode count of the matrix cross-check.
    #[serde(rename = "N", default = "default_spectrum_n")]
    pub n: usize,
    #[serde(default = "default_closure")]
    pub closure: Closure,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig {
            window: SearchWindow::default(),
            max_subdiv: default_subdiv(),
            n: default_spectrum_n(),
            closure: default_closure(),
        }
    }
}

impl SpectrumConfig {
    pub fn options(&self) -> SpectrumOptions {
        SpectrumOptions {
            roots: RootOptions {
                window: self.window,
                max_subdiv: self.max_subdiv,
            },
            n: self.n,
            closure: self.closure,
        }
    }
}

/// Quantity varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    M,
    V,
    #[serde(rename = "T_inf")]
    TInf,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::M => "M",
            SweepAxis::V => "V",
            SweepAxis::TInf => "T_inf",
        }
    }
}

/// Sweep settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    pub grid: Vec<f64>,
}

/// A complete run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Flat parameter block (`sigma`, `sigma_bar`, `mu_l`, `rho_l`, `kappa`,
    /// `c_g`, `R_spec`, `T_inf`, optional `gamma`, and optionally `M`, `V`).
    pub params: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<ProblemConfig>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub ic: IcConfig,
    #[serde(default)]
    pub spectrum: SpectrumConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub seed: u64,
}

/// Everything needed to integrate one configuration.
#[derive(Debug, Clone)]
pub struct PreparedRun {
    pub eq: EquilibriumState,
    pub basis: ModalBasis,
    pub system: GalerkinSystem,
    pub ic: ModalState,
    pub t_end: f64,
    pub options: SimulationOptions,
}

impl RunConfig {
    /// Parses a JSON document.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| BubbleError::Parse(e.to_string()))?;
        Self::from_value(value)
    }

    /// Parses an already decoded JSON value.
    pub fn from_value(value: Value) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_value(value).map_err(|e| {
            let msg = e.to_string();
            match msg.strip_prefix("missing field `").and_then(|r| r.split('`').next()) {
                Some(key) => BubbleError::MissingKey(key.to_string()),
                None => BubbleError::Parse(msg),
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and parses a configuration file.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BubbleError::Io(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    /// Checks every block (the equilibrium itself is solved lazily).
    pub fn validate(&self) -> Result<()> {
        self.parameter_block()?;
        let s = &self.solver;
        if s.n == 0 {
            return Err(BubbleError::field("N", "N must be at least 1"));
        }
        IntegratorOptions {
            rtol: s.rtol,
            atol: s.atol,
            ..IntegratorOptions::default()
        }
        .validate()?;
        for (key, v) in [("t_end", s.t_end), ("output_dt", s.output_dt)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(BubbleError::field(key, format!("{key} must be positive and finite")));
                }
            }
        }
        if self.ic.shape != "slow-mode" {
            Shape::parse(&self.ic.shape)?;
        } else if self.ic.norm.is_none() {
            return Err(BubbleError::field("norm", "shape \"slow-mode\" needs a target norm"));
        }
        if let Some(n) = self.ic.norm {
            if !(n > 0.0 && n.is_finite()) {
                return Err(BubbleError::field("norm", "norm must be positive"));
            }
        }
        self.spectrum.window.validate()?;
        if let Some(sw) = &self.sweep {
            if sw.grid.is_empty() || sw.grid.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(BubbleError::field("grid", "sweep grid must hold positive values"));
            }
        }
        Ok(())
    }

    /// The flat parameter block with the problem's M and V merged in.
    fn parameter_block(&self) -> Result<Value> {
        let mut map: Map<String, Value> = self
            .params
            .as_object()
            .cloned()
            .ok_or_else(|| BubbleError::Parse("\"params\" must be a JSON object".into()))?;
        if let Some(p) = &self.problem {
            for key in ["M", "V"] {
                if map.contains_key(key) {
                    return Err(BubbleError::field(key, format!("\"{key}\" given in both params and problem")));
                }
            }
            map.insert("M".into(), p.m.into());
            match (p.v, p.v_ratio) {
                (Some(v), None) => {
                    map.insert("V".into(), serde_json::to_value(v).map_err(|e| BubbleError::Parse(e.to_string()))?);
                }
                // Placeholder volume; the ratio determines the real one.
                (None, Some(r)) if r > 0.0 && r.is_finite() => {
                    map.insert("V".into(), 1.0.into());
                }
                (None, Some(_)) => return Err(BubbleError::field("V_ratio", "V_ratio must be positive")),
                (Some(_), Some(_)) => {
                    return Err(BubbleError::field("V", "give either V or V_ratio, not both"));
                }
                (None, None) => return Err(BubbleError::MissingKey("V".into())),
            }
        }
        let block = Value::Object(map);
        params_from_json(&block)?;
        Ok(block)
    }

    /// Solves for the equilibrium of the configured problem.
    pub fn equilibrium(&self) -> Result<EquilibriumState> {
        let (params, mv) = params_from_json(&self.parameter_block()?)?;
        match self.problem.and_then(|p| p.v_ratio) {
            Some(ratio) => solve_with_volume_ratio(mv.m, ratio, &params),
            None => solve_radius(mv.m, mv.v, &params),
        }
    }

    /// Copy with one sweep coordinate replaced.
    pub fn with_axis_value(&self, axis: SweepAxis, value: f64) -> Result<RunConfig> {
        let mut cfg = self.clone();
        let map = cfg
            .params
            .as_object_mut()
            .ok_or_else(|| BubbleError::Parse("\"params\" must be a JSON object".into()))?;
        match axis {
            SweepAxis::TInf => {
                map.insert("T_inf".into(), value.into());
            }
            SweepAxis::M => match cfg.problem.as_mut() {
                Some(p) => p.m = value,
                None => {
                    map.insert("M".into(), value.into());
                }
            },
            SweepAxis::V => match cfg.problem.as_mut() {
                Some(p) => {
                    p.v = Some(Volume::Finite(value));
                    p.v_ratio = None;
                }
                None => {
                    map.insert("V".into(), value.into());
                }
            },
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Builds the equilibrium, basis, system, initial state and options.
    pub fn prepare(&self) -> Result<PreparedRun> {
        let eq = self.equilibrium()?;
        let s = &self.solver;
        let basis = ModalBasis::new(&eq, s.n)?;
        let system = GalerkinSystem::new(&eq, &basis, s.formulation);
        let unit = eq.pi2_kappa_bar();
        let t_end = s.t_end.unwrap_or(DEFAULT_T_END_UNITS / unit);
        let output_dt = s.output_dt.unwrap_or(DEFAULT_OUTPUT_DT_UNITS / unit);
        let ic = if self.ic.shape == "slow-mode" {
            slow_mode_initial(&system, self.ic.norm.unwrap_or_default())?
        } else {
            let profile = InitialProfile {
                eps: self.ic.eps,
                delta: self.ic.delta,
                d_r0: self.ic.d_r0,
                shape: Shape::parse(&self.ic.shape)?,
            };
            match self.ic.norm {
                Some(target) => make_initial_with_norm(&profile, target, &eq, &basis)?.1,
                None => make_initial(&profile, &eq, &basis)?,
            }
        };
        let options = SimulationOptions {
            integrator: IntegratorOptions {
                rtol: s.rtol,
                atol: s.atol,
                control: s.control,
                ..IntegratorOptions::default()
            },
            output_dt,
        };
        Ok(PreparedRun {
            eq,
            basis,
            system,
            ic,
            t_end,
            options,
        })
    }

    /// Integrates the configured backend.
    pub fn run_simulation(&self) -> Result<(PreparedRun, Trajectory)> {
        let run = self.prepare()?;
        let traj = match self.solver.backend {
            Backend::Galerkin => simulate(&run.system, &run.ic, run.t_end, &run.options)?,
            Backend::Fd => {
                let fd = FdSystem::new(&run.eq, self.solver.grid)?;
                let z0 = fd.from_modal(&run.ic);
                fd_oracle(&fd, &z0, &run.basis, run.t_end, &run.options)?
            }
        };
        Ok((run, traj))
    }
}

/// The reference configuration (reference parameters, M = 1, V = 10), used
/// by examples and tests.
pub fn reference_config() -> RunConfig {
    RunConfig::from_value(serde_json::json!({
        "params": {
            "sigma": 1.0, "sigma_bar": 1.0, "mu_l": 1.0, "rho_l": 1.0,
            "kappa": 1.0, "c_g": 3.0, "R_spec": 2.0, "T_inf": 1.0
        },
        "problem": {"M": 1.0, "V": 10.0}
    }))
    .expect("reference configuration is valid")
}
