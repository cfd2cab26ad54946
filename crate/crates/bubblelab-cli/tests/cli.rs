//! End-to-end checks of the `bubblelab` binary: exit codes, error objects,
//! artifacts and determinism.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

const BIN: &str = env!("CARGO_BIN_EXE_bubblelab");

/// Fresh scratch directory per test.
fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn reference() -> Value {
    json!({
        "params": {
            "sigma": 1.0, "sigma_bar": 1.0, "mu_l": 1.0, "rho_l": 1.0,
            "kappa": 1.0, "c_g": 3.0, "R_spec": 2.0, "T_inf": 1.0
        },
        "problem": {"M": 1.0, "V": 10.0},
        "solver": {"N": 16, "rtol": 1e-7, "atol": 1e-12},
        "ic": {"eps": 0.01},
        "sweep": {"axis": "M", "grid": [0.5, 1.0, 2.0, 4.0, 8.0]}
    })
}

fn write_config(dir: &Path, cfg: &Value) -> PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path
}

fn run(args: &[&str], log: Option<&str>) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env_remove("BUBBLELAB_LOG");
    if let Some(level) = log {
        cmd.env("BUBBLELAB_LOG", level);
    }
    cmd.output().unwrap()
}

fn stderr_json(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().last().unwrap_or_default();
    serde_json::from_str(line).unwrap_or_else(|e| panic!("stderr is not JSON ({e}): {text}"))
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn equilibrium_reports_on_stdout() {
    let dir = scratch("equilibrium");
    let cfg = write_config(&dir, &reference());
    let out = run(&["equilibrium", "--config", cfg.to_str().unwrap()], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    assert!(report["R_star"].as_f64().unwrap() > 0.0);
}

#[test]
fn missing_parameter_exits_with_two_and_names_it() {
    let dir = scratch("missing");
    let mut cfg = reference();
    cfg["params"].as_object_mut().unwrap().remove("sigma");
    let path = write_config(&dir, &cfg);
    let out = run(&["--config", path.to_str().unwrap(), "equilibrium"], None);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_json(&out);
    assert_eq!(err["kind"], "validation");
    assert!(err.to_string().contains("sigma"), "{err}");
}

#[test]
fn invalid_log_level_exits_with_two() {
    let dir = scratch("loglevel");
    let path = write_config(&dir, &reference());
    let out = run(&["--config", path.to_str().unwrap(), "equilibrium"], Some("verbose"));
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_json(&out).to_string().contains("BUBBLELAB_LOG"));
    for level in ["error", "warn", "info", "debug"] {
        assert!(run(&["--config", path.to_str().unwrap(), "equilibrium"], Some(level)).status.success());
    }
}

#[test]
fn missing_config_file_is_a_validation_error() {
    let out = run(&["--config", "/nonexistent/config.json", "equilibrium"], None);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["simulate"], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn empty_search_window_exits_with_three() {
    let dir = scratch("numerical");
    let mut cfg = reference();
    cfg["spectrum"] = json!({"window": {"re_min": -0.01, "re_max": -0.001, "im_max": 0.01}});
    let path = write_config(&dir, &cfg);
    let out = run(&["--config", path.to_str().unwrap(), "spectrum"], None);
    assert_eq!(out.status.code(), Some(3));
    let err = stderr_json(&out);
    assert_eq!(err["kind"], "numerical");
}

#[test]
fn simulate_then_audit_is_monotone() {
    let dir = scratch("audit");
    let path = write_config(&dir, &reference());
    let out_dir = dir.join("run");
    let out = run(&["--config", path.to_str().unwrap(), "--out", out_dir.to_str().unwrap(), "simulate"], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for file in ["trajectory.csv", "states.csv", "energy.csv", "summary.json"] {
        assert!(out_dir.join(file).exists(), "{file}");
    }
    let header = fs::read_to_string(out_dir.join("trajectory.csv")).unwrap();
    assert!(header.starts_with("t,rho2,delta_R,dR,mass_drift,energy,dissipation,znorm"));
    let traj = out_dir.join("trajectory.csv");
    let out = run(&["--config", path.to_str().unwrap(), "audit", traj.to_str().unwrap()], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    assert_eq!(report["monotone"], true);
    assert_eq!(report["coercivity_ok"], true);
    assert_eq!(report["minimizer"]["violations"], 0);
    assert!(out_dir.join("audit.json").exists() && out_dir.join("minimizer.csv").exists());
}

#[test]
fn sweep_rows_follow_the_grid_order() {
    let dir = scratch("sweep");
    let path = write_config(&dir, &reference());
    let out_dir = dir.join("out");
    let out = run(
        &["--config", path.to_str().unwrap(), "--out", out_dir.to_str().unwrap(), "--workers", "3", "sweep"],
        None,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    let values: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(values, vec![0.5, 1.0, 2.0, 4.0, 8.0]);
    for i in 0..5 {
        assert!(out_dir.join("sweep").join(format!("point_{i:03}.json")).exists());
    }
    let bad = run(&["--config", path.to_str().unwrap(), "--out", out_dir.to_str().unwrap(), "--workers", "0", "sweep"], None);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn runs_are_byte_identical() {
    let dir = scratch("determinism");
    let path = write_config(&dir, &reference());
    let mut artifacts = Vec::new();
    for (k, workers) in ["1", "4"].iter().enumerate() {
        let out_dir = dir.join(format!("run{k}"));
        let o = out_dir.to_str().unwrap();
        let cfg = path.to_str().unwrap();
        assert!(run(&["--config", cfg, "--out", o, "simulate"], None).status.success());
        let traj = out_dir.join("trajectory.csv");
        assert!(run(&["--config", cfg, "--seed", "11", "audit", traj.to_str().unwrap()], None).status.success());
        assert!(run(&["--config", cfg, "--out", o, "--workers", workers, "sweep"], None).status.success());
        artifacts.push(
            ["trajectory.csv", "energy.csv", "audit.csv", "minimizer.csv", "sweep.csv"]
                .map(|f| fs::read(out_dir.join(f)).unwrap()),
        );
    }
    assert!(artifacts[0] == artifacts[1]);
}
