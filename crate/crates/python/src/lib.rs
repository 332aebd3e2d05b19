//! Python bindings: data profiles, the damping clock, the exact and viscous
//! solvers, and the scenario runner.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use droplet_core::bv;
use droplet_core::damping::{self, AlphaKind, DampingSpec, DEFAULT_WARP_RESOLUTION};
use droplet_core::field::FieldSlice;
use droplet_core::hopf_lax::{self, GridSpec, SolveOptions};
use droplet_core::profile;
use droplet_core::scenario::{self, RunOptions};
use droplet_core::viscous::{self, BoundaryMode, ViscousOptions};
use droplet_core::DropletError;

fn py_err(e: DropletError) -> PyErr {
    match e {
        DropletError::Numeric { .. } | DropletError::Breakdown(_) | DropletError::Consistency(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Piecewise-constant or piecewise-linear data on an interval.
#[pyclass(name = "Profile", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyProfile(profile::Profile);

#[pymethods]
impl PyProfile {
    /// `values[k]` on `[breaks[k], breaks[k+1])`.
    #[staticmethod]
    fn piecewise_constant(breaks: Vec<f64>, values: Vec<f64>) -> PyResult<Self> {
        profile::Profile::piecewise_constant(breaks, values).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn piecewise_linear(nodes: Vec<f64>, values: Vec<f64>) -> PyResult<Self> {
        profile::Profile::piecewise_linear(nodes, values).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn constant(value: f64, lo: f64, hi: f64) -> PyResult<Self> {
        profile::Profile::constant(value, lo, hi).map(Self).map_err(py_err)
    }

    fn __call__(&self, x: f64) -> f64 {
        self.0.eval(x)
    }

    fn integral(&self, a: f64, b: f64) -> f64 {
        self.0.integral(a, b)
    }

    fn sup_norm(&self) -> f64 {
        self.0.sup_norm()
    }
}

/// Damping coefficient and the clock `τ(t) = ∫₀ᵗ e^{-∫α}`.
#[pyclass(name = "TimeWarp", frozen)]
struct PyTimeWarp(damping::TimeWarp);

#[pymethods]
impl PyTimeWarp {
    /// `alpha` is either a constant or a list of `(t, α)` samples joined linearly.
    #[new]
    #[pyo3(signature = (horizon, alpha=0.0, samples=None))]
    fn new(horizon: f64, alpha: f64, samples: Option<Vec<(f64, f64)>>) -> PyResult<Self> {
        let kind = match samples {
            Some(s) => AlphaKind::PiecewiseLinear(s),
            None => AlphaKind::Constant(alpha),
        };
        let spec = DampingSpec { kind, horizon };
        damping::build_warp(&spec, DEFAULT_WARP_RESOLUTION)
            .map(Self)
            .map_err(py_err)
    }

    fn tau(&self, t: f64) -> f64 {
        self.0.tau(t)
    }

    fn t_of_tau(&self, tau: f64) -> f64 {
        self.0.t_of_tau(tau)
    }

    fn amplitude(&self, t: f64) -> f64 {
        self.0.amplitude(t)
    }

    #[getter]
    fn tau_max(&self) -> f64 {
        self.0.tau_max()
    }

    #[getter]
    fn horizon(&self) -> f64 {
        self.0.horizon()
    }
}

/// One time slice: node values of `u`, `V` and the density of `v`, plus
/// point masses as `(location, mass)`.
#[pyclass(name = "Slice", frozen, get_all)]
struct PySlice {
    time: f64,
    x: Vec<f64>,
    velocity: Vec<f64>,
    cumulative: Vec<f64>,
    density: Vec<f64>,
    atoms: Vec<(f64, f64)>,
}

#[pymethods]
impl PySlice {
    fn __repr__(&self) -> String {
        format!("Slice(time={}, nodes={}, atoms={})", self.time, self.x.len(), self.atoms.len())
    }
}

impl From<&FieldSlice> for PySlice {
    fn from(s: &FieldSlice) -> Self {
        PySlice {
            time: s.time,
            x: s.grid().to_vec(),
            velocity: s.velocity.values().to_vec(),
            cumulative: s.cumulative.values().to_vec(),
            density: s.measure.density.values().to_vec(),
            atoms: s.measure.atoms.iter().map(|a| (a.location, a.mass)).collect(),
        }
    }
}

fn slices(v: &[FieldSlice]) -> Vec<PySlice> {
    v.iter().map(PySlice::from).collect()
}

/// Exact entropy solution on `[0, x_max]` with mass-condition boundary data.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
fn solve_ibvp(
    py: Python<'_>,
    u0: &PyProfile,
    v0: &PyProfile,
    u_boundary: &PyProfile,
    v_boundary: &PyProfile,
    warp: &PyTimeWarp,
    x_max: f64,
    cells: usize,
    times: Vec<f64>,
) -> PyResult<Vec<PySlice>> {
    let grid = GridSpec::half_line(x_max, cells, times);
    let sol = py
        .detach(|| {
            hopf_lax::solve_ibvp(&u0.0, &v0.0, &u_boundary.0, &v_boundary.0, &warp.0, &grid, &SolveOptions::default())
        })
        .map_err(py_err)?;
    Ok(slices(&sol.slices))
}

/// Exact entropy solution of the Cauchy problem on `[x_min, x_max]`.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
fn solve_ivp(
    py: Python<'_>,
    u0: &PyProfile,
    v0: &PyProfile,
    warp: &PyTimeWarp,
    x_min: f64,
    x_max: f64,
    cells: usize,
    times: Vec<f64>,
) -> PyResult<Vec<PySlice>> {
    let grid = GridSpec {
        x_min,
        x_max,
        cells,
        times,
    };
    let sol = py
        .detach(|| hopf_lax::solve_ivp(&u0.0, &v0.0, &warp.0, &grid, &SolveOptions::default()))
        .map_err(py_err)?;
    Ok(slices(&sol.slices))
}

/// Viscous approximation; returns the slices and the number of sup-norm
/// bound violations.
#[pyfunction]
#[pyo3(signature = (u0, v0, u_boundary, v_boundary, warp, epsilon, times, mode="mass"))]
#[allow(clippy::too_many_arguments)]
fn run_viscous(
    py: Python<'_>,
    u0: &PyProfile,
    v0: &PyProfile,
    u_boundary: &PyProfile,
    v_boundary: &PyProfile,
    warp: &PyTimeWarp,
    epsilon: f64,
    times: Vec<f64>,
    mode: &str,
) -> PyResult<(Vec<PySlice>, usize)> {
    let mode = match mode {
        "mass" => BoundaryMode::Mass,
        "dirichlet" => BoundaryMode::Dirichlet,
        other => return Err(PyValueError::new_err(format!("unknown mode `{other}`"))),
    };
    let spec = warp.0.spec().clone();
    let sol = py
        .detach(|| {
            viscous::run_viscous(
                &u0.0,
                &v0.0,
                &u_boundary.0,
                &v_boundary.0,
                &spec,
                epsilon,
                &times,
                mode,
                &ViscousOptions::default(),
            )
        })
        .map_err(py_err)?;
    Ok((slices(&sol.field_slices()), sol.bound_violations()))
}

/// Rankine–Hugoniot speed `(p⁻ + p⁺)/2`.
#[pyfunction]
fn shock_speed(p_left: f64, p_right: f64) -> f64 {
    bv::shock_speed(p_left, p_right)
}

/// `∫₀¹ g((1-s) left + s right) ds` for a Python callable `g`.
#[pyfunction]
fn averaged_superposition(g: &Bound<'_, PyAny>, left: f64, right: f64) -> PyResult<f64> {
    let failure: std::cell::RefCell<Option<PyErr>> = Default::default();
    let value = bv::averaged_superposition(
        |p| match g.call1((p,)).and_then(|r| r.extract::<f64>()) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        left,
        right,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    value.map_err(py_err)
}

/// Whether a boundary trace is admissible for the boundary velocity.
#[pyfunction]
fn admissible_set_contains(u_boundary: f64, trace: f64) -> bool {
    hopf_lax::admissible_set_contains(u_boundary, trace)
}

/// `(name, value, tolerance, passed)`.
type CheckRow = (String, f64, f64, bool);

/// Run a scenario given as text. Returns `(passed, checks, slices)` where
/// each check is `(name, value, tolerance, passed)`.
#[pyfunction]
#[pyo3(signature = (source, slices=None, tol_scale=1.0))]
fn run_scenario(
    py: Python<'_>,
    source: &str,
    slices: Option<usize>,
    tol_scale: f64,
) -> PyResult<(bool, Vec<CheckRow>, Vec<PySlice>)> {
    let sc = scenario::Scenario::parse(source).map_err(py_err)?;
    let opts = RunOptions { tol_scale, slices };
    let out = py.detach(|| scenario::run_scenario(&sc, &opts)).map_err(py_err)?;
    let checks = out
        .checks
        .iter()
        .map(|c| (c.name.clone(), c.value, c.tolerance, c.passed))
        .collect();
    Ok((out.passed(), checks, self::slices(&out.slices)))
}

#[pymodule]
fn droplet(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProfile>()?;
    m.add_class::<PyTimeWarp>()?;
    m.add_class::<PySlice>()?;
    m.add_function(wrap_pyfunction!(solve_ibvp, m)?)?;
    m.add_function(wrap_pyfunction!(solve_ivp, m)?)?;
    m.add_function(wrap_pyfunction!(run_viscous, m)?)?;
    m.add_function(wrap_pyfunction!(shock_speed, m)?)?;
    m.add_function(wrap_pyfunction!(averaged_superposition, m)?)?;
    m.add_function(wrap_pyfunction!(admissible_set_contains, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    Ok(())
}
