//! The five subcommands. Each returns the JSON report printed on stdout and
//! writes its artifacts into the output directory.

use std::path::{Path, PathBuf};

use bubblelab::config::{Backend, RunConfig, SweepAxis};
use bubblelab::dynamics::ModalState;
use bubblelab::energy::{audit_series, energy_report, sample_minimizer, DEFAULT_MINIMIZER_RADIUS};
use bubblelab::equilibrium::{derived_constants, EquilibriumState};
use bubblelab::modal::ModalBasis;
use bubblelab::params::params_to_json;
use bubblelab::simulate::{fit_decay_rate, Trajectory};
use bubblelab::spectrum::{decay_bounds, find_roots, spectrum_report};
use bubblelab::{BubbleError, Result};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::output::{ensure_dir, num, read_json, write_csv, write_json, Table};

/// θ columns carried by the trajectory CSV.
const TRAJECTORY_MODES: usize = 8;

/// Samples drawn by the minimizer audit.
const MINIMIZER_SAMPLES: usize = 200;

/// Command-line options shared by all subcommands.
pub struct Context {
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
}

impl Context {
    /// Output directory (default: the working directory), created on demand.
    fn out_dir(&self) -> Result<PathBuf> {
        let dir = self.out.clone().unwrap_or_else(|| PathBuf::from("."));
        ensure_dir(&dir)?;
        Ok(dir)
    }

    fn seed(&self, cfg: Option<&RunConfig>) -> u64 {
        self.seed.or(cfg.map(|c| c.seed)).unwrap_or(0)
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| BubbleError::Io(e.to_string()))
}

/// E† of an equilibrium (energy of the zero perturbation).
fn equilibrium_energy(eq: &EquilibriumState) -> Result<f64> {
    let basis = ModalBasis::new(eq, 1)?;
    Ok(energy_report(&ModalState::zero(1), eq, &basis)?.e)
}

fn equilibrium_json(eq: &EquilibriumState) -> Result<Value> {
    Ok(json!({
        "params": params_to_json(&eq.params, &eq.mv),
        "R_star": eq.r_star,
        "rho_star": eq.rho_star,
        "Rbar_star": eq.v_bar().map(|_| eq.rbar_star),
        "I": eq.i,
        "beta": eq.beta,
        "kappa_bar": eq.kappa_bar,
        "R_tilde": eq.r_tilde,
        "pi2_kappa_bar": eq.pi2_kappa_bar(),
        "pressure": eq.pressure(),
        "bracket": eq.bracket,
        "residual": eq.residual,
        "poly_residual": eq.poly_residual,
        "constants": to_json(&derived_constants(eq))?,
        "E_star": equilibrium_energy(eq)?,
    }))
}

/// `equilibrium`: the equilibrium report (also equilibrium.json with --out).
pub fn equilibrium(cfg: &RunConfig, ctx: &Context) -> Result<Value> {
    let eq = cfg.equilibrium()?;
    log::info!("R† = {:e}, ρ† = {:e}", eq.r_star, eq.rho_star);
    let report = equilibrium_json(&eq)?;
    if ctx.out.is_some() {
        write_json(&ctx.out_dir()?.join("equilibrium.json"), &report)?;
    }
    Ok(report)
}

fn trajectory_rows(traj: &Trajectory) -> (Vec<String>, Vec<Vec<String>>) {
    let mut header: Vec<String> = ["t", "rho2", "delta_R", "dR", "mass_drift", "energy", "dissipation", "znorm"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((1..=TRAJECTORY_MODES).map(|j| format!("theta_{j}")));
    let rows = (0..traj.times.len())
        .map(|k| {
            let s = &traj.states[k];
            let mut row = vec![
                num(traj.times[k]),
                num(s.rho2),
                num(s.delta_r),
                num(s.d_r),
                num(traj.mass_drift[k]),
                num(traj.energy_gap[k]),
                num(traj.dissipation[k]),
                num(traj.znorm[k]),
            ];
            row.extend((0..TRAJECTORY_MODES).map(|j| num(s.theta.get(j).copied().unwrap_or(0.0))));
            row
        })
        .collect();
    (header, rows)
}

fn state_rows(traj: &Trajectory) -> (Vec<String>, Vec<Vec<String>>) {
    let n = traj.states.first().map_or(0, |s| s.theta.len());
    let mut header: Vec<String> = ["t", "rho2", "delta_R", "dR"].iter().map(|s| s.to_string()).collect();
    header.extend((1..=n).map(|j| format!("theta_{j}")));
    let rows = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(t, s)| {
            let mut row = vec![num(*t), num(s.rho2), num(s.delta_r), num(s.d_r)];
            row.extend(s.theta.iter().map(|x| num(*x)));
            row
        })
        .collect();
    (header, rows)
}

fn energy_rows(traj: &Trajectory) -> (Vec<String>, Vec<Vec<String>>) {
    let header = ["t", "E", "gap", "D", "quad_form"].iter().map(|s| s.to_string()).collect();
    let rows = (0..traj.times.len())
        .map(|k| {
            vec![
                num(traj.times[k]),
                num(traj.energy[k]),
                num(traj.energy_gap[k]),
                num(traj.dissipation[k]),
                num(traj.quad_form[k]),
            ]
        })
        .collect();
    (header, rows)
}

/// `simulate`: integrates and writes trajectory.csv (fixed schema),
/// states.csv (all modes), energy.csv (E, gap, D, quad_form) and summary.json.
pub fn simulate(cfg: &RunConfig, ctx: &Context) -> Result<Value> {
    let dir = ctx.out_dir()?;
    let (run, traj) = cfg.run_simulation()?;
    let eq = run.eq;
    log::info!(
        "{} samples, {} accepted / {} rejected steps",
        traj.times.len(),
        traj.stats.accepted,
        traj.stats.rejected
    );
    let (h, r) = trajectory_rows(&traj);
    write_csv(&dir.join("trajectory.csv"), &h, &r)?;
    let (h, r) = state_rows(&traj);
    write_csv(&dir.join("states.csv"), &h, &r)?;
    let (h, r) = energy_rows(&traj);
    write_csv(&dir.join("energy.csv"), &h, &r)?;
    let unit = eq.pi2_kappa_bar();
    let fitted = if run.t_end >= 6.0 / unit * (1.0 - 1e-9) {
        fit_decay_rate(&traj, &eq).ok()
    } else {
        None
    };
    let summary = json!({
        "backend": to_json(&cfg.solver.backend)?,
        "N": cfg.solver.n,
        "grid": (cfg.solver.backend == Backend::Fd).then_some(cfg.solver.grid),
        "t_end": run.t_end,
        "output_dt": run.options.output_dt,
        "rtol": cfg.solver.rtol,
        "atol": cfg.solver.atol,
        "samples": traj.times.len(),
        "initial_norm": traj.znorm.first().copied(),
        "final_norm": traj.final_norm(),
        "max_mass_drift": traj.max_mass_drift(),
        "fitted_rate": fitted,
        "pi2_kappa_bar": unit,
        "E_star": equilibrium_energy(&eq)?,
        "stats": to_json(&traj.stats)?,
        "stopped": traj.stopped,
        "equilibrium": {"R_star": eq.r_star, "rho_star": eq.rho_star},
        "config": to_json(cfg)?,
    });
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(summary)
}

/// `spectrum`: the spectral report (also spectrum.json with --out).
pub fn spectrum(cfg: &RunConfig, ctx: &Context) -> Result<Value> {
    let eq = cfg.equilibrium()?;
    let report = to_json(&spectrum_report(&eq, &cfg.spectrum.options())?)?;
    if ctx.out.is_some() {
        write_json(&ctx.out_dir()?.join("spectrum.json"), &report)?;
    }
    Ok(report)
}

/// `audit`: energy-dissipation audit of a trajectory written by `simulate`.
///
/// The trajectory's `energy` column (E − E†) and `dissipation` column are
/// required; if the sibling energy.csv exists, absolute E and the quadratic
/// form are taken from it, and the sibling summary.json supplies rtol.
/// With a configuration, a seeded minimizer audit is added.
pub fn audit(trajectory: &Path, cfg: Option<&RunConfig>, ctx: &Context) -> Result<Value> {
    let table = Table::read(trajectory)?;
    let times = table.column("t")?;
    let gap = table.column("energy")?;
    let dissipation = table.column("dissipation")?;
    let sibling = trajectory.parent().unwrap_or(Path::new("."));
    let energy_path = sibling.join("energy.csv");
    let (energy, quad_form, source) = match Table::read(&energy_path) {
        Ok(t) if t.rows.len() == times.len() => (t.column("E")?, t.column("quad_form")?, "energy.csv"),
        _ => {
            log::warn!("no matching energy.csv next to the trajectory; quadratic form taken as 0");
            (gap.clone(), vec![0.0; times.len()], "trajectory")
        }
    };
    let summary_rtol = read_json(&sibling.join("summary.json"))
        .ok()
        .and_then(|s| s["rtol"].as_f64());
    let rtol = summary_rtol.or(cfg.map(|c| c.solver.rtol)).unwrap_or(1e-8);
    let (rows, verdict) = audit_series(&times, &energy, &gap, &dissipation, &quad_form, rtol)?;
    let dir = match &ctx.out {
        Some(_) => ctx.out_dir()?,
        None => sibling.to_path_buf(),
    };
    let header: Vec<String> = ["t", "E", "D", "dEdt", "residual", "gap", "quad_form"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![num(r.t), num(r.e), num(r.d), num(r.d_e_dt), num(r.residual), num(r.gap), num(r.quad_form)])
        .collect();
    write_csv(&dir.join("audit.csv"), &header, &body)?;
    let mut report = to_json(&verdict)?;
    report["rtol"] = rtol.into();
    report["energy_source"] = source.into();
    if let Some(cfg) = cfg {
        let eq = cfg.equilibrium()?;
        let basis = ModalBasis::new(&eq, cfg.solver.n)?;
        let seed = ctx.seed(Some(cfg));
        let samples = sample_minimizer(&eq, &basis, MINIMIZER_SAMPLES, DEFAULT_MINIMIZER_RADIUS, seed)?;
        let violations = samples.iter().filter(|s| !(s.gap >= s.quad_form)).count();
        let min_ratio = samples
            .iter()
            .filter(|s| s.quad_form > 0.0)
            .map(|s| s.gap / s.quad_form)
            .fold(f64::INFINITY, f64::min);
        let header: Vec<String> = ["eps", "delta", "condition", "gap", "quad_form"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let body: Vec<Vec<String>> = samples
            .iter()
            .map(|s| vec![num(s.eps), num(s.delta), num(s.condition), num(s.gap), num(s.quad_form)])
            .collect();
        write_csv(&dir.join("minimizer.csv"), &header, &body)?;
        report["minimizer"] = json!({
            "samples": samples.len(),
            "radius": DEFAULT_MINIMIZER_RADIUS,
            "seed": seed,
            "violations": violations,
            "min_gap_over_quad_form": min_ratio,
        });
    }
    write_json(&dir.join("audit.json"), &report)?;
    Ok(report)
}

/// One sweep point.
fn sweep_point(cfg: &RunConfig, axis: SweepAxis, value: f64) -> Result<Value> {
    let point = cfg.with_axis_value(axis, value)?;
    let eq = point.equilibrium()?;
    let roots = find_roots(&eq, &point.spectrum.options().roots)?;
    let abscissa = roots
        .roots
        .first()
        .map(|r| r.re)
        .ok_or_else(|| BubbleError::Unresolved(format!("no zero of M in the window at {} = {value}", axis.name())))?;
    let varpi = match eq.v_bar() {
        Some(_) => Some(decay_bounds(&eq)?.varpi),
        None => None,
    };
    Ok(json!({
        "axis": axis.name(),
        "value": value,
        "R_star": eq.r_star,
        "rho_star": eq.rho_star,
        "kappa_bar": eq.kappa_bar,
        "pi2_kappa_bar": eq.pi2_kappa_bar(),
        "abscissa": abscissa,
        "varpi": varpi,
    }))
}

/// `sweep`: evaluates every grid point on a bounded worker pool, writes
/// sweep/point_KKK.json per point, then merges them in grid order into
/// sweep.csv.
pub fn sweep(cfg: &RunConfig, ctx: &Context) -> Result<Value> {
    let sw = cfg
        .sweep
        .clone()
        .ok_or_else(|| BubbleError::MissingKey("sweep".into()))?;
    let dir = ctx.out_dir()?;
    let point_dir = dir.join("sweep");
    ensure_dir(&point_dir)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = ctx.workers {
        if w == 0 {
            return Err(BubbleError::field("workers", "--workers must be at least 1"));
        }
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| BubbleError::Numerical(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<Value>> = pool.install(|| {
        sw.grid
            .par_iter()
            .enumerate()
            .map(|(i, &value)| {
                log::info!("sweep point {i}: {} = {value}", sw.axis.name());
                let res = sweep_point(cfg, sw.axis, value);
                let doc = match &res {
                    Ok(v) => v.clone(),
                    Err(e) => json!({"axis": sw.axis.name(), "value": value, "error": e.to_json()}),
                };
                write_json(&point_dir.join(format!("point_{i:03}.json")), &doc)?;
                res
            })
            .collect()
    });
    let points = results.into_iter().collect::<Result<Vec<Value>>>()?;
    let header: Vec<String> = ["axis", "value", "R_star", "rho_star", "kappa_bar", "pi2_kappa_bar", "abscissa", "varpi"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let cell = |v: &Value| v.as_f64().map_or_else(|| "NaN".to_string(), num);
    let body: Vec<Vec<String>> = points
        .iter()
        .map(|p| {
            let mut row = vec![sw.axis.name().to_string()];
            row.extend(header[1..].iter().map(|k| cell(&p[k.as_str()])));
            row
        })
        .collect();
    write_csv(&dir.join("sweep.csv"), &header, &body)?;
    Ok(json!({"axis": sw.axis.name(), "points": points}))
}
