//! Python bindings: discretization maps, one-step methods and the experiment runner.

use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

use dmap::composition::{adjoint_method, stormer_verlet, triple_jump, Stepper as CoreStepper};
use dmap::map::{self as core_map, DiscretizationMap, TangentPoint};
use dmap::newton::NewtonConfig;
use dmap::systems::{cubic_oscillator, kepler, pendulum, Mechanical, Spring};
use dmap_harness::config::{ExperimentConfig, MapSpec};
use dmap_harness::registry::{self, AnyMap};
use dmap_harness::{HarnessError, RunOptions};

create_exception!(dmap, NumericalError, PyException);

fn core_err(e: dmap::Error) -> PyErr {
    match e {
        dmap::Error::RejectedInput(_) | dmap::Error::DimensionMismatch { .. } => PyValueError::new_err(e.to_string()),
        _ => NumericalError::new_err(e.to_string()),
    }
}

fn harness_err(e: HarnessError) -> PyErr {
    match e {
        HarnessError::Numerical(_) => NumericalError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// A discretization map `(q, v) -> (x0, x1)` from the built-in registry.
#[pyclass(module = "dmap", frozen)]
struct Map {
    inner: AnyMap,
}

#[pymethods]
impl Map {
    /// `h` is only read by `newmark`.
    #[new]
    #[pyo3(signature = (name, dim = 1, theta = None, gamma = None, beta = None, c = None, h = 0.1))]
    fn new(
        name: &str,
        dim: usize,
        theta: Option<f64>,
        gamma: Option<f64>,
        beta: Option<f64>,
        c: Option<f64>,
        h: f64,
    ) -> PyResult<Self> {
        let spec = MapSpec { name: name.to_string(), theta, gamma, beta, c };
        Ok(Map { inner: registry::build_map(&spec, dim, h).map_err(harness_err)? })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn eval(&self, q: Vec<f64>, v: Vec<f64>) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let z = TangentPoint::new(q, v).map_err(core_err)?;
        core_map::eval_pair(&self.inner, &z).map_err(core_err)
    }

    /// `(q, v)` with `eval(q, v) == (x0, x1)`.
    fn inverse(&self, x0: Vec<f64>, x1: Vec<f64>) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let z = core_map::invert(&self.inner, &x0, &x1).map_err(core_err)?;
        Ok((z.q, z.v))
    }

    /// Jacobian of `(q, v) -> (x0, x1)` as a list of rows.
    fn jacobian(&self, q: Vec<f64>, v: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        let z = TangentPoint::new(q, v).map_err(core_err)?;
        Ok(core_map::jacobian(&self.inner, &z).map_err(core_err)?.to_rows())
    }

    /// Maximum deviation from the pointwise symmetry condition over random samples.
    #[pyo3(signature = (samples = 100, seed = 0))]
    fn symmetry_defect(&self, samples: usize, seed: u64) -> f64 {
        let pts = core_map::random_tangent_points(self.inner.dim(), samples, 0.5, seed);
        core_map::is_symmetric(&self.inner, &pts).max_deviation
    }

    fn __repr__(&self) -> String {
        format!("Map({}, dim={})", self.inner.name(), self.inner.dim())
    }
}

/// A one-step method on phase space `x = (q, p)`.
#[pyclass(module = "dmap", frozen)]
struct Stepper {
    inner: CoreStepper,
}

fn system_kind(system: &str, k: f64, n: usize) -> PyResult<SystemKind> {
    Ok(match system {
        "harmonic" => SystemKind::Harmonic(Mechanical::unit(Spring { n, k })),
        "pendulum" => SystemKind::Pendulum,
        "cubic" => SystemKind::Cubic,
        "kepler-2d" => SystemKind::Kepler,
        _ => return Err(PyValueError::new_err(format!("unknown system `{system}`"))),
    })
}

enum SystemKind {
    Harmonic(Mechanical<Spring>),
    Pendulum,
    Cubic,
    Kepler,
}

impl SystemKind {
    fn dim(&self) -> usize {
        match self {
            SystemKind::Harmonic(s) => s.potential.n,
            SystemKind::Kepler => 2,
            _ => 1,
        }
    }
}

macro_rules! with_system {
    ($kind:expr, |$s:ident| $body:expr) => {
        match $kind {
            SystemKind::Harmonic($s) => $body,
            SystemKind::Pendulum => {
                let $s = pendulum();
                $body
            }
            SystemKind::Cubic => {
                let $s = cubic_oscillator();
                $body
            }
            SystemKind::Kepler => {
                let $s = kepler();
                $body
            }
        }
    };
}

fn newton(tol: f64) -> NewtonConfig {
    NewtonConfig { tol, ..NewtonConfig::default() }
}

#[pymethods]
impl Stepper {
    /// Symplectic method from the cotangent lift of `map`, for `harmonic`, `pendulum`, `cubic` or `kepler-2d`.
    /// `dim` is the configuration dimension of `harmonic`.
    #[staticmethod]
    #[pyo3(signature = (map, system, k = 1.0, dim = 1, tol = 1e-12))]
    fn hamiltonian(map: &Map, system: &str, k: f64, dim: usize, tol: f64) -> PyResult<Self> {
        let kind = system_kind(system, k, dim)?;
        if kind.dim() != map.inner.dim() {
            return Err(PyValueError::new_err(format!(
                "map has dimension {}, system needs {}",
                map.inner.dim(),
                kind.dim()
            )));
        }
        let m = map.inner.clone();
        Ok(Stepper { inner: with_system!(kind, |s| CoreStepper::hamiltonian(m, s, newton(tol))) })
    }

    #[staticmethod]
    #[pyo3(signature = (system, k = 1.0, dim = 1))]
    fn stormer_verlet(system: &str, k: f64, dim: usize) -> PyResult<Self> {
        let kind = system_kind(system, k, dim)?;
        Ok(Stepper { inner: with_system!(kind, |s| stormer_verlet(s, newton(1e-12))) })
    }

    fn triple_jump(&self) -> PyResult<Self> {
        Ok(Stepper { inner: triple_jump(&self.inner).map_err(core_err)? })
    }

    fn adjoint(&self) -> Self {
        Stepper { inner: adjoint_method(&self.inner, NewtonConfig::default()) }
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label.clone()
    }

    #[getter]
    fn declared_order(&self) -> u32 {
        self.inner.declared_order
    }

    #[getter]
    fn symmetric(&self) -> bool {
        self.inner.symmetric
    }

    #[getter]
    fn symplectic(&self) -> bool {
        self.inner.symplectic
    }

    fn step(&self, x: Vec<f64>, h: f64) -> PyResult<Vec<f64>> {
        Ok(self.inner.step(&x, h).map_err(core_err)?.state)
    }

    /// States after 0, 1, ..., `steps` steps.
    fn trajectory(&self, x: Vec<f64>, h: f64, steps: usize) -> PyResult<Vec<Vec<f64>>> {
        let mut out = vec![x];
        for _ in 0..steps {
            let next = self.inner.step(out.last().unwrap(), h).map_err(core_err)?.state;
            out.push(next);
        }
        Ok(out)
    }

    fn __repr__(&self) -> String {
        format!("Stepper({}, order={})", self.inner.label, self.inner.declared_order)
    }
}

/// Result of one experiment.
#[pyclass(module = "dmap", frozen, get_all)]
struct Report {
    config: String,
    method: String,
    declared_order: u32,
    observed_order: Option<f64>,
    reference: String,
    /// One dict per step size, keyed by the CSV header.
    rows: Vec<std::collections::BTreeMap<String, f64>>,
    failure: Option<String>,
    csv: String,
    meta: String,
}

impl From<dmap_harness::Report> for Report {
    fn from(r: dmap_harness::Report) -> Self {
        let rows = r
            .rows
            .iter()
            .map(|row| {
                [
                    ("h", row.h),
                    ("global_error", row.global_error),
                    ("energy_drift_max", row.energy_drift_max),
                    ("symplectic_defect", row.symplectic_defect),
                    ("newton_iters_mean", row.newton_iters_mean),
                    ("wall_time", row.wall_time),
                ]
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect()
            })
            .collect();
        Report {
            observed_order: r.observed_order(),
            csv: r.csv(),
            meta: r.meta(),
            config: r.config,
            method: r.method,
            declared_order: r.declared_order,
            reference: r.reference.to_string(),
            rows,
            failure: r.failure.map(|e| e.to_string()),
        }
    }
}

#[pymethods]
impl Report {
    fn __repr__(&self) -> String {
        format!("Report({}, {} rows)", self.config, self.rows.len())
    }
}

/// Runs an experiment given the text of a config file.
#[pyfunction]
#[pyo3(signature = (text, name = "config", timing = false))]
fn run_config(py: Python<'_>, text: &str, name: &str, timing: bool) -> PyResult<Report> {
    let cfg = ExperimentConfig::parse(text, name).map_err(harness_err)?;
    let report = py.detach(|| dmap_harness::run_experiment(&cfg, &RunOptions { timing })).map_err(harness_err)?;
    Ok(report.into())
}

type SuiteResult = (Vec<Report>, Vec<(String, String)>, i32);

/// Runs every `*.cfg` file in `dir`. Returns `(reports, failures, exit_code)`.
#[pyfunction]
fn run_suite(py: Python<'_>, dir: PathBuf) -> PyResult<SuiteResult> {
    let suite = py.detach(|| dmap_harness::run_suite(&dir, |_| {}, &RunOptions::default())).map_err(harness_err)?;
    let failures = suite.failures().into_iter().map(|(f, e)| (f.to_string(), e.to_string())).collect();
    let code = suite.exit_code();
    let reports = suite.entries.into_iter().filter_map(|e| e.outcome.ok()).map(Report::from).collect();
    Ok((reports, failures, code))
}

/// Checks the defining identities of a built-in map at random points.
/// Returns `(label, zero_section, fiber_derivative, passed)` per tested configuration.
#[pyfunction]
fn validate_map(name: &str) -> PyResult<Vec<(String, f64, f64, bool)>> {
    Ok(registry::validate_named(name)
        .map_err(harness_err)?
        .into_iter()
        .map(|(label, r)| (label, r.zero_section, r.fiber_derivative, r.passed))
        .collect())
}

#[pyfunction]
fn list_maps() -> Vec<&'static str> {
    registry::MAPS.iter().map(|m| m.name).collect()
}

#[pyfunction]
fn list_systems() -> Vec<&'static str> {
    registry::SYSTEMS.iter().map(|s| s.name).collect()
}

#[pyfunction]
fn triple_jump_coefficients(order: u32) -> (f64, f64, f64) {
    let [a, b, c] = dmap::composition::triple_jump_coefficients(order);
    (a, b, c)
}

#[pymodule]
#[pyo3(name = "dmap")]
fn dmap_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Map>()?;
    m.add_class::<Stepper>()?;
    m.add_class::<Report>()?;
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    m.add("CSV_HEADER", dmap_harness::CSV_HEADER)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    m.add_function(wrap_pyfunction!(validate_map, m)?)?;
    m.add_function(wrap_pyfunction!(list_maps, m)?)?;
    m.add_function(wrap_pyfunction!(list_systems, m)?)?;
    m.add_function(wrap_pyfunction!(triple_jump_coefficients, m)?)?;
    Ok(())
}
