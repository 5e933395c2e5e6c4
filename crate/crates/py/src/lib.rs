//! Python bindings: presets, runs, convergence studies and the verification
//! checks. Results come back as plain dicts and lists.

use std::path::PathBuf;

use idp_pampa::driver::config::preset_source;
use idp_pampa::driver::reference::reference as reference_run;
use idp_pampa::driver::run::{run as run_config, RunOptions, RunOutcome};
use idp_pampa::driver::{convergence_study, preset_names as names, RunConfig};
use idp_pampa::oracle::{
    check_limiter, check_transform_domain, check_transform_round_trip, sample_lf_splitting, LimiterCase,
    SamplingRanges, SplittingSystem,
};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use pyo3::IntoPyObjectExt;
use serde::Serialize;
use serde_json::Value;

fn solver_err(e: idp_pampa::Error) -> PyErr {
    match e {
        idp_pampa::Error::Config(_) | idp_pampa::Error::Grid(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn json_to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    match v {
        Value::Null => Ok(py.None().into_bound(py)),
        Value::Bool(b) => b.into_bound_py_any(py),
        Value::Number(n) => match (n.as_i64(), n.as_u64()) {
            (Some(i), _) => i.into_bound_py_any(py),
            (None, Some(u)) => u.into_bound_py_any(py),
            _ => n.as_f64().unwrap_or(f64::NAN).into_bound_py_any(py),
        },
        Value::String(s) => s.into_bound_py_any(py),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            Ok(list.into_any())
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, json_to_py(py, item)?)?;
            }
            Ok(dict.into_any())
        }
    }
}

/// Serialize through JSON; non-finite floats become `None`.
fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let v = serde_json::to_value(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    json_to_py(py, &v)
}

fn load(config: &str) -> PyResult<RunConfig> {
    RunConfig::load(config).map_err(solver_err)
}

fn system(name: &str, gamma: f64) -> PyResult<SplittingSystem> {
    match name {
        "euler" => Ok(SplittingSystem::Euler { gamma }),
        "mhd" => Ok(SplittingSystem::Mhd { gamma }),
        other => Err(PyValueError::new_err(format!("system must be 'euler' or 'mhd', got '{other}'"))),
    }
}

fn outcome_dict<'py>(py: Python<'py>, outcome: &RunOutcome) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("solution", to_py(py, &outcome.solution)?)?;
    d.set_item("initial", to_py(py, &outcome.initial)?)?;
    d.set_item("summary", to_py(py, &outcome.summary)?)?;
    d.set_item("diagnostics", to_py(py, &outcome.diagnostics)?)?;
    Ok(d)
}

fn run_with(py: Python<'_>, cfg: RunConfig, cells: Option<usize>, sweep: bool, out: Option<PathBuf>) -> PyResult<Bound<'_, PyDict>> {
    let cfg = match cells {
        Some(n) => cfg.with_cells(n),
        None => cfg,
    };
    let opts = RunOptions {
        out_dir: out,
        sweep,
        ..RunOptions::default()
    };
    let outcome = py.detach(|| run_config(&cfg, &opts)).map_err(solver_err)?;
    outcome_dict(py, &outcome)
}

/// Names of the built-in presets.
#[pyfunction]
fn preset_names() -> Vec<&'static str> {
    names()
}

/// TOML source of a built-in preset.
#[pyfunction]
fn preset_toml(name: &str) -> PyResult<&'static str> {
    preset_source(name).ok_or_else(|| PyValueError::new_err(format!("no preset named '{name}'")))
}

/// Run a preset or TOML file to its final time.
#[pyfunction]
#[pyo3(signature = (config, cells=None, sweep=false, out=None))]
fn run<'py>(
    py: Python<'py>,
    config: &str,
    cells: Option<usize>,
    sweep: bool,
    out: Option<PathBuf>,
) -> PyResult<Bound<'py, PyDict>> {
    run_with(py, load(config)?, cells, sweep, out)
}

/// Run a configuration given as TOML text.
#[pyfunction]
#[pyo3(signature = (text, cells=None, sweep=false, out=None))]
fn run_toml<'py>(
    py: Python<'py>,
    text: &str,
    cells: Option<usize>,
    sweep: bool,
    out: Option<PathBuf>,
) -> PyResult<Bound<'py, PyDict>> {
    run_with(py, RunConfig::from_toml(text).map_err(solver_err)?, cells, sweep, out)
}

/// Grid refinement study; one dict per grid.
#[pyfunction]
#[pyo3(signature = (config, cells, sweep=false))]
fn convergence<'py>(py: Python<'py>, config: &str, cells: Vec<usize>, sweep: bool) -> PyResult<Bound<'py, PyAny>> {
    let cfg = load(config)?;
    let rows = py.detach(|| convergence_study(&cfg, &cells, sweep)).map_err(solver_err)?;
    to_py(py, &rows)
}

/// First-order reference solution of a configuration.
#[pyfunction]
#[pyo3(signature = (config, cells=None))]
fn reference<'py>(py: Python<'py>, config: &str, cells: Option<usize>) -> PyResult<Bound<'py, PyDict>> {
    let mut cfg = load(config)?;
    if let Some(n) = cells {
        cfg.reference.cells = n;
    }
    let (solution, info) = py.detach(|| reference_run(&cfg)).map_err(solver_err)?;
    let d = PyDict::new(py);
    d.set_item("solution", to_py(py, &solution)?)?;
    d.set_item("info", to_py(py, &info)?)?;
    Ok(d)
}

/// Single-cell counterexample for the unlimited scheme.
#[pyfunction]
#[pyo3(signature = (eps=0.1, ratio=1.0/6.0))]
fn counterexample(py: Python<'_>, eps: f64, ratio: f64) -> PyResult<Bound<'_, PyAny>> {
    let r = idp_pampa::oracle::counterexample(eps, ratio).map_err(solver_err)?;
    to_py(py, &r)
}

/// Sample random state pairs and check the Lax–Friedrichs splitting states
/// exactly.
#[pyfunction]
#[pyo3(signature = (system="euler", samples=10_000, seed=42, gamma=1.4))]
fn verify_splitting<'py>(py: Python<'py>, system: &str, samples: usize, seed: u64, gamma: f64) -> PyResult<Bound<'py, PyAny>> {
    let sys = self::system(system, gamma)?;
    let r = py.detach(|| sample_lf_splitting(sys, samples, seed, 1.0, &SamplingRanges::default()));
    let out = to_py(py, &r)?;
    out.set_item("passed", r.passed())?;
    Ok(out)
}

/// Domain membership of random transformed states and conservative round
/// trips.
#[pyfunction]
#[pyo3(signature = (system="euler", samples=10_000, seed=42, gamma=1.4, tolerance=1e-11))]
fn verify_transform<'py>(
    py: Python<'py>,
    system: &str,
    samples: usize,
    seed: u64,
    gamma: f64,
    tolerance: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let sys = self::system(system, gamma)?;
    let (domain, trip) = py.detach(|| {
        (
            check_transform_domain(sys, samples, seed, 50.0),
            check_transform_round_trip(sys, samples, seed, tolerance),
        )
    });
    let d = PyDict::new(py);
    d.set_item("domain", to_py(py, &domain)?)?;
    d.set_item("round_trip", to_py(py, &trip)?)?;
    d.set_item("passed", domain.passed() && trip.passed())?;
    Ok(d)
}

/// Random limiter invocations: average decomposition and domain membership.
#[pyfunction]
#[pyo3(signature = (case="scalar", samples=10_000, seed=42, gamma=1.4, tolerance=1e-12))]
fn verify_limiter<'py>(
    py: Python<'py>,
    case: &str,
    samples: usize,
    seed: u64,
    gamma: f64,
    tolerance: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let case = match case {
        "scalar" => LimiterCase::Scalar,
        "euler" => LimiterCase::Euler { gamma },
        "mhd" => LimiterCase::Mhd { gamma },
        other => return Err(PyValueError::new_err(format!("unknown limiter case '{other}'"))),
    };
    let r = py.detach(|| check_limiter(case, samples, seed, tolerance));
    let out = to_py(py, &r)?;
    out.set_item("passed", r.passed())?;
    Ok(out)
}

#[pymodule]
#[pyo3(name = "idp_pampa")]
pub fn idp_pampa_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(preset_names, m)?)?;
    m.add_function(wrap_pyfunction!(preset_toml, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(run_toml, m)?)?;
    m.add_function(wrap_pyfunction!(convergence, m)?)?;
    m.add_function(wrap_pyfunction!(reference, m)?)?;
    m.add_function(wrap_pyfunction!(counterexample, m)?)?;
    m.add_function(wrap_pyfunction!(verify_splitting, m)?)?;
    m.add_function(wrap_pyfunction!(verify_transform, m)?)?;
    m.add_function(wrap_pyfunction!(verify_limiter, m)?)?;
    Ok(())
}
