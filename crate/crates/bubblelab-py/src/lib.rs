//! Python bindings. Every function takes a run configuration — a dict or a
//! JSON string with the same schema as the command-line `--config` file —
//! and returns plain Python objects (dicts, lists, floats).
//!
//! Invalid input raises `ValueError`; numerical failures raise
//! `ArithmeticError`.

use bubblelab::config::RunConfig;
use bubblelab::simulate::fit_decay_rate;
use bubblelab::spectrum::{decay_bounds, eval_m as eval_characteristic, spectrum_report};
use bubblelab::{BubbleError, ErrorKind};
use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList, PyString};
use pyo3::IntoPyObjectExt;
use serde_json::Value;

fn to_py_err(e: BubbleError) -> PyErr {
    let text = e.to_json().to_string();
    match e.kind() {
        ErrorKind::Validation => PyValueError::new_err(text),
        ErrorKind::Numerical => PyArithmeticError::new_err(text),
    }
}

/// Converts a JSON value into the equivalent Python object.
fn json_to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    match v {
        Value::Null => Ok(py.None().into_bound(py)),
        Value::Bool(b) => b.into_bound_py_any(py),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_bound_py_any(py),
            None => n.as_f64().unwrap_or(f64::NAN).into_bound_py_any(py),
        },
        Value::String(s) => s.into_bound_py_any(py),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_bound_py_any(py)
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, json_to_py(py, item)?)?;
            }
            dict.into_bound_py_any(py)
        }
    }
}

/// Parses a configuration given as a JSON string or a JSON-compatible object.
fn parse_config(py: Python<'_>, config: &Bound<'_, PyAny>) -> PyResult<RunConfig> {
    let text: String = if let Ok(s) = config.cast::<PyString>() {
        s.to_str()?.to_owned()
    } else {
        py.import("json")?.call_method1("dumps", (config,))?.extract()?
    };
    RunConfig::from_json_str(&text).map_err(to_py_err)
}

fn serialize<T: serde::Serialize>(v: &T) -> PyResult<Value> {
    serde_json::to_value(v).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Equilibrium of the configured problem: R†, ρ†, κ̄, R̃, π²κ̄ and the
/// linearisation constants A, B, C, K.
#[pyfunction]
fn equilibrium<'py>(py: Python<'py>, config: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let cfg = parse_config(py, config)?;
    let eq = cfg.equilibrium().map_err(to_py_err)?;
    let mut v = serialize(&eq)?;
    v["pi2_kappa_bar"] = eq.pi2_kappa_bar().into();
    v["constants"] = serialize(&bubblelab::equilibrium::derived_constants(&eq))?;
    json_to_py(py, &v)
}

/// Integrates the configured run; returns the sampled series and the fitted
/// decay exponent (None when t_end is shorter than 6/(π²κ̄)).
#[pyfunction]
fn simulate<'py>(py: Python<'py>, config: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let cfg = parse_config(py, config)?;
    let (run, traj) = py.detach(|| cfg.run_simulation()).map_err(to_py_err)?;
    let unit = run.eq.pi2_kappa_bar();
    let fitted = (run.t_end >= 6.0 / unit * (1.0 - 1e-9))
        .then(|| fit_decay_rate(&traj, &run.eq).ok())
        .flatten();
    let v = serde_json::json!({
        "t": traj.times,
        "rho2": traj.states.iter().map(|s| s.rho2).collect::<Vec<_>>(),
        "delta_R": traj.states.iter().map(|s| s.delta_r).collect::<Vec<_>>(),
        "dR": traj.states.iter().map(|s| s.d_r).collect::<Vec<_>>(),
        "mass_drift": traj.mass_drift,
        "energy": traj.energy_gap,
        "dissipation": traj.dissipation,
        "znorm": traj.znorm,
        "fitted_rate": fitted,
        "pi2_kappa_bar": unit,
        "stopped": traj.stopped,
    });
    json_to_py(py, &v)
}

/// Zeros of M(λ), decay bounds, gap certificate and matrix cross-check.
#[pyfunction]
fn spectrum<'py>(py: Python<'py>, config: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let cfg = parse_config(py, config)?;
    let eq = cfg.equilibrium().map_err(to_py_err)?;
    let report = py
        .detach(|| spectrum_report(&eq, &cfg.spectrum.options()))
        .map_err(to_py_err)?;
    json_to_py(py, &serialize(&report)?)
}

/// Θ₁, Θ₂, ϖ and the damping case (finite liquid volume only).
#[pyfunction]
fn bounds<'py>(py: Python<'py>, config: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let cfg = parse_config(py, config)?;
    let eq = cfg.equilibrium().map_err(to_py_err)?;
    json_to_py(py, &serialize(&decay_bounds(&eq).map_err(to_py_err)?)?)
}

/// The characteristic function M(λ) at a complex point.
#[pyfunction]
fn eval_m(py: Python<'_>, config: &Bound<'_, PyAny>, lam: Complex64) -> PyResult<Complex64> {
    let cfg = parse_config(py, config)?;
    let eq = cfg.equilibrium().map_err(to_py_err)?;
    eval_characteristic(lam, &eq).map_err(to_py_err)
}

#[pymodule]
#[pyo3(name = "bubblelab")]
fn bubblelab_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(equilibrium, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(bounds, m)?)?;
    m.add_function(wrap_pyfunction!(eval_m, m)?)?;
    Ok(())
}
