//! Python bindings for `frustra_gp`.
//!
//! Structured results (surfaces, reports, phase results) are handed over as
//! plain dicts and lists built from their JSON form.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use frustra_gp::dynamics::{self, Dynamics, TimeGrid};
use frustra_gp::experiments::{self, AngleGrid, SurfaceOptions};
use frustra_gp::model::{self, InitialStateAngles, SystemConfig};
use frustra_gp::oracle::{self, OracleLimits};
use frustra_gp::phase::{self, GpMethod};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_error(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn to_python<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(runtime_error)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn parse_mode(mode: &str) -> PyResult<Dynamics> {
    mode.parse().map_err(value_error)
}

/// Qubit frequency, the two bath couplings and the spins per bath.
#[pyclass(name = "SystemConfig", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PySystemConfig(SystemConfig);

#[pymethods]
impl PySystemConfig {
    #[new]
    fn new(omega: f64, alpha1: f64, alpha2: f64, bath_size: u32) -> PyResult<Self> {
        SystemConfig::new(omega, alpha1, alpha2, bath_size).map(Self).map_err(value_error)
    }

    #[getter]
    fn omega(&self) -> f64 {
        self.0.omega
    }

    #[getter]
    fn alpha1(&self) -> f64 {
        self.0.alpha1
    }

    #[getter]
    fn alpha2(&self) -> f64 {
        self.0.alpha2
    }

    #[getter]
    fn bath_size(&self) -> u32 {
        self.0.bath_size
    }

    /// Fastest sector precession frequency.
    fn gamma_max(&self) -> f64 {
        self.0.gamma_max()
    }

    fn __repr__(&self) -> String {
        let c = self.0;
        format!("SystemConfig(omega={}, alpha1={}, alpha2={}, bath_size={})", c.omega, c.alpha1, c.alpha2, c.bath_size)
    }
}

/// Preparation angles; `theta = 0` is spin down.
#[pyclass(name = "InitialState", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyInitialState(InitialStateAngles);

#[pymethods]
impl PyInitialState {
    #[new]
    fn new(theta: f64, phi: f64) -> PyResult<Self> {
        InitialStateAngles::new(theta, phi).map(Self).map_err(value_error)
    }

    /// State whose Bloch vector sits at polar angle `theta0` from +z.
    #[staticmethod]
    fn from_bloch_polar(theta0: f64, phi: f64) -> PyResult<Self> {
        InitialStateAngles::from_bloch_polar(theta0, phi).map(Self).map_err(value_error)
    }

    #[getter]
    fn theta(&self) -> f64 {
        self.0.theta()
    }

    #[getter]
    fn phi(&self) -> f64 {
        self.0.phi()
    }

    fn bloch_polar(&self) -> f64 {
        self.0.bloch_polar()
    }

    fn bloch(&self) -> (f64, f64, f64) {
        model::initial_bloch(&self.0).to_array().into()
    }

    fn __repr__(&self) -> String {
        format!("InitialState(theta={}, phi={})", self.0.theta(), self.0.phi())
    }
}

/// `(m, weight, zeta)` per collective sector; `zeta` as a decimal string.
#[pyfunction]
fn sector_weights(bath_size: u32) -> PyResult<Vec<(f64, f64, String)>> {
    let w = model::sector_weights(bath_size).map_err(value_error)?;
    Ok(w.into_iter().map(|s| (s.m(), s.weight, s.zeta.to_string())).collect())
}

#[pyfunction]
fn bloch_at(config: &PySystemConfig, state: &PyInitialState, t: f64) -> (f64, f64, f64) {
    dynamics::bloch_at(&config.0, &state.0, t).to_array().into()
}

/// `(t, x, y, z)` rows on `steps` evenly spaced nodes of `[0, t_end]`.
#[pyfunction]
#[pyo3(signature = (config, state, t_end, steps, mode = "physical"))]
fn bloch_trajectory(
    config: &PySystemConfig,
    state: &PyInitialState,
    t_end: f64,
    steps: usize,
    mode: &str,
) -> PyResult<Vec<(f64, f64, f64, f64)>> {
    let grid = TimeGrid::new(0.0, t_end, steps).map_err(value_error)?;
    let traj = match parse_mode(mode)? {
        Dynamics::Physical => dynamics::bloch_trajectory(&config.0, &state.0, &grid),
        Dynamics::Literal => dynamics::literal_trajectory(&config.0, &state.0, &grid),
    }
    .map_err(runtime_error)?;
    Ok(traj.times().zip(&traj.points).map(|(t, p)| (t, p.x, p.y, p.z)).collect())
}

/// Exact reduced Bloch vector from full diagonalization (small baths only).
#[pyfunction]
#[pyo3(signature = (config, state, t, oracle_cap = 4))]
fn evolve_reduced(config: &PySystemConfig, state: &PyInitialState, t: f64, oracle_cap: u32) -> PyResult<(f64, f64, f64)> {
    let rho = oracle::evolve_reduced(&config.0, &state.0, t, &OracleLimits::with_override(oracle_cap));
    match rho {
        Ok(rho) => Ok(rho.bloch().to_array().into()),
        Err(e @ oracle::OracleError::BathTooLarge { .. }) => Err(value_error(e)),
        Err(e) => Err(runtime_error(e)),
    }
}

/// Geometric phase at `t_end`. `method` is closed-form, south-pole or holonomy.
#[pyfunction]
#[pyo3(signature = (config, state, t_end, steps = None, method = "closed-form", mode = "physical"))]
fn geometric_phase<'py>(
    py: Python<'py>,
    config: &PySystemConfig,
    state: &PyInitialState,
    t_end: f64,
    steps: Option<usize>,
    method: &str,
    mode: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let grid = match steps {
        Some(n) => TimeGrid::new(0.0, t_end, n),
        None => TimeGrid::resolving(t_end, config.0.gamma_max(), 100.0),
    }
    .map_err(value_error)?;
    let traj = match parse_mode(mode)? {
        Dynamics::Physical => dynamics::bloch_trajectory(&config.0, &state.0, &grid),
        Dynamics::Literal => dynamics::literal_trajectory(&config.0, &state.0, &grid),
    }
    .map_err(runtime_error)?;
    let result = match method.parse::<GpMethod>().map_err(value_error)? {
        GpMethod::DiscreteHolonomy => phase::gp_discrete_holonomy(&traj),
        GpMethod::ClosedForm => phase::polar_track(&traj).and_then(|t| phase::gp_closed_form(&t, &state.0)),
        GpMethod::SouthPole => phase::polar_track(&traj).and_then(|t| phase::gp_south_pole(&t)),
    }
    .map_err(runtime_error)?;
    to_python(py, &result)
}

/// `−π(1 − cos θ0)` as a principal value.
#[pyfunction]
fn unitary_reference(theta0: f64) -> f64 {
    phase::gp_unitary_reference(theta0)
}

/// Principal value in `[−π, π)`.
#[pyfunction]
fn wrap_phase(x: f64) -> f64 {
    phase::wrap_phase(x)
}

#[pyfunction]
#[pyo3(signature = (
    config, t, n_theta = 61, n_phi = 61, theta_min = experiments::POLE_MARGIN,
    theta_max = std::f64::consts::PI - experiments::POLE_MARGIN, mode = "physical", sampling = 100.0
))]
#[allow(clippy::too_many_arguments)]
fn gp_surface<'py>(
    py: Python<'py>,
    config: &PySystemConfig,
    t: f64,
    n_theta: usize,
    n_phi: usize,
    theta_min: f64,
    theta_max: f64,
    mode: &str,
    sampling: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let grid = AngleGrid::new(n_theta, theta_min, theta_max, n_phi).map_err(value_error)?;
    let opts = SurfaceOptions { sampling_factor: sampling, ..SurfaceOptions::default() };
    let surface = py
        .detach(|| experiments::gp_surface_with(&config.0, &grid, t, parse_mode(mode)?, &opts).map_err(runtime_error))?;
    to_python(py, &surface)
}

/// Four-strategy comparison at each bath size.
#[pyfunction]
#[pyo3(signature = (omega, t, bath_sizes, n_theta = 61, n_phi = 61))]
fn frustration_scan<'py>(
    py: Python<'py>,
    omega: f64,
    t: f64,
    bath_sizes: Vec<u32>,
    n_theta: usize,
    n_phi: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let grid = AngleGrid::new(n_theta, experiments::POLE_MARGIN, std::f64::consts::PI - experiments::POLE_MARGIN, n_phi)
        .map_err(value_error)?;
    let records = py
        .detach(|| experiments::frustration_scan(omega, t, &bath_sizes, &grid, &SurfaceOptions::default()))
        .map_err(runtime_error)?;
    to_python(py, &records)
}

#[pyfunction]
#[pyo3(signature = (oracle_cap = 4))]
fn verify_suite(py: Python<'_>, oracle_cap: u32) -> PyResult<Bound<'_, PyAny>> {
    let report = py.detach(|| experiments::verify_suite(&OracleLimits::with_override(oracle_cap)));
    to_python(py, &report)
}

#[pymodule]
fn frustra_gp_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySystemConfig>()?;
    m.add_class::<PyInitialState>()?;
    m.add_function(wrap_pyfunction!(sector_weights, m)?)?;
    m.add_function(wrap_pyfunction!(bloch_at, m)?)?;
    m.add_function(wrap_pyfunction!(bloch_trajectory, m)?)?;
    m.add_function(wrap_pyfunction!(evolve_reduced, m)?)?;
    m.add_function(wrap_pyfunction!(geometric_phase, m)?)?;
    m.add_function(wrap_pyfunction!(unitary_reference, m)?)?;
    m.add_function(wrap_pyfunction!(wrap_phase, m)?)?;
    m.add_function(wrap_pyfunction!(gp_surface, m)?)?;
    m.add_function(wrap_pyfunction!(frustration_scan, m)?)?;
    m.add_function(wrap_pyfunction!(verify_suite, m)?)?;
    Ok(())
}
