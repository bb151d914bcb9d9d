//! Python bindings. Every function returns plain dicts and lists.

use std::path::Path;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use msfq_core::bloch::{optimal_time_decoherent, DriftSystem};
use msfq_core::coherent::{benchmarks, sensitivity_coherent};
use msfq_core::sweep::{Axis, Figure, SweepSpec};
use msfq_core::{config, oracle, params, rwa, validate, Error, SensorConfig};

fn err(e: Error) -> PyErr {
    if e.is_config() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| err(e.into()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

/// `overrides` are `key=value` strings with TOML values, applied after the file.
fn load(path: Option<&str>, overrides: Option<Vec<String>>) -> PyResult<SensorConfig> {
    config::load(path.map(Path::new), &overrides.unwrap_or_default()).map_err(err)
}

#[pyfunction]
fn config_fields() -> Vec<&'static str> {
    config::FIELDS.to_vec()
}

#[pyfunction]
#[pyo3(signature = (config=None, overrides=None))]
fn derive(py: Python<'_>, config: Option<&str>, overrides: Option<Vec<String>>) -> PyResult<Py<PyAny>> {
    let p = load(config, overrides)?.derive().map_err(err)?;
    to_py(py, &p)
}

#[derive(Serialize)]
struct Sensitivity {
    coherent: msfq_core::coherent::CoherentSensitivity,
    benchmarks: msfq_core::coherent::Benchmarks,
    t_opt_dec: f64,
    dg_sqrt_t_dec: f64,
}

/// Coherent and decoherent optimal sensitivities plus the MQ/MCQ benchmarks
/// for `n` repetitions.
#[pyfunction]
#[pyo3(signature = (config=None, overrides=None, n=10.0))]
fn sensitivity(py: Python<'_>, config: Option<&str>, overrides: Option<Vec<String>>, n: f64) -> PyResult<Py<PyAny>> {
    let p = load(config, overrides)?.derive().map_err(err)?;
    let d = DriftSystem::from_params(&p).map_err(err)?;
    let dec = optimal_time_decoherent(&d, p.kappa_g, 4.0 * std::f64::consts::PI / p.omega_b).map_err(err)?;
    let out = Sensitivity {
        coherent: sensitivity_coherent(p.m, p.omega, p.r, p.omega_b).map_err(err)?,
        benchmarks: benchmarks(p.m, p.omega, n).map_err(err)?,
        t_opt_dec: dec.t_opt,
        dg_sqrt_t_dec: dec.dg_sqrt_t,
    };
    to_py(py, &out)
}

/// RWA boundary in trap units (`delta_ratio` = δ/ω).
#[pyfunction]
fn rwa_boundary(py: Python<'_>, r: f64, epsilon: f64, delta_ratio: f64) -> PyResult<Py<PyAny>> {
    let a_p = params::pump_from_squeeze(r) * delta_ratio;
    to_py(py, &rwa::rwa_boundary(r, epsilon, delta_ratio, a_p).map_err(err)?)
}

/// Tables for one figure, keyed by table name. `axes` entries use the CLI
/// form `name=min:max:points[:log]`.
#[pyfunction]
#[pyo3(signature = (figure, config=None, overrides=None, axes=None, epsilon=0.1))]
fn sweep(
    py: Python<'_>,
    figure: &str,
    config: Option<&str>,
    overrides: Option<Vec<String>>,
    axes: Option<Vec<String>>,
    epsilon: f64,
) -> PyResult<Py<PyAny>> {
    let fig: Figure = figure.parse().map_err(err)?;
    let mut spec = SweepSpec::new(fig, load(config, overrides)?);
    spec.epsilon = epsilon;
    for a in axes.unwrap_or_default() {
        spec.set_axis(Axis::parse(&a).map_err(err)?).map_err(err)?;
    }
    let tables = msfq_core::sweep::run(&spec).map_err(err)?;
    let map: serde_json::Map<String, serde_json::Value> = tables
        .iter()
        .map(|t| Ok((t.name.clone(), serde_json::to_value(t)?)))
        .collect::<Result<_, serde_json::Error>>()
        .map_err(|e| err(e.into()))?;
    to_py(py, &map)
}

#[pyfunction]
#[pyo3(signature = (config=None, overrides=None, dim=None))]
fn run_oracle(
    py: Python<'_>,
    config: Option<&str>,
    overrides: Option<Vec<String>>,
    dim: Option<usize>,
) -> PyResult<Py<PyAny>> {
    let cfg = load(config, overrides)?;
    let suite = py.detach(|| oracle::run_suite(&cfg, dim)).map_err(err)?;
    to_py(py, &suite)
}

#[pyfunction]
fn run_validation(py: Python<'_>) -> PyResult<Py<PyAny>> {
    let report = py.detach(validate::run_all).map_err(err)?;
    to_py(py, &report)
}

#[pymodule]
fn msfq(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(config_fields, m)?)?;
    m.add_function(wrap_pyfunction!(derive, m)?)?;
    m.add_function(wrap_pyfunction!(sensitivity, m)?)?;
    m.add_function(wrap_pyfunction!(rwa_boundary, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(run_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(run_validation, m)?)?;
    Ok(())
}
