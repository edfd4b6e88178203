//! Python bindings for the snapslam core: scenario loading, the forward
//! model, imaging, ambiguity, and the iterative SLAM loop.
//!
//! The surface is deliberately plain: positions are `(x, y, z)` tuples,
//! snapshots are lists of `(re, im)` pairs, and detections come back as
//! dicts. This keeps the module easy to drive from numpy or plain scripts.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use snapslam::forward::{self, NoiseModel, Snapshot};
use snapslam::imaging::{self, GridSpec};
use snapslam::scene::{self, ReflectingSurface, Vec3};
use snapslam::slam::{self, StopRule};

fn vec3(t: (f64, f64, f64)) -> Vec3 {
    Vec3::new(t.0, t.1, t.2)
}

fn tuple3(v: Vec3) -> (f64, f64, f64) {
    (v.x, v.y, v.z)
}

fn to_py_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn grid_from_tuple(g: (f64, f64, f64, f64, f64, f64)) -> PyResult<GridSpec> {
    GridSpec::new(g.0, g.1, g.2, g.3, g.4, g.5).map_err(to_py_err)
}

fn snapshot_from_list(samples: Vec<(f64, f64)>) -> Snapshot {
    Snapshot::from_samples(samples.into_iter().map(|(re, im)| Complex64::new(re, im)).collect())
}

/// A validated scene: APs, UE, surfaces, scatterers, and RF parameters.
#[pyclass(name = "Scenario")]
struct PyScenario {
    inner: scene::Scenario,
}

#[pymethods]
impl PyScenario {
    /// Parses and validates a scenario JSON document.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = snapslam::cli::parse_scenario_str(text).map_err(to_py_err)?;
        Ok(PyScenario { inner })
    }

    /// Loads and validates a scenario JSON file.
    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        let inner =
            snapslam::cli::parse_scenario(std::path::Path::new(path)).map_err(to_py_err)?;
        Ok(PyScenario { inner })
    }

    #[getter]
    fn num_aps(&self) -> usize {
        self.inner.num_aps()
    }

    /// Total number of propagation paths (LoS + reflections + scatterers).
    #[getter]
    fn num_paths(&self) -> usize {
        self.inner.num_paths()
    }

    #[getter]
    fn ue(&self) -> (f64, f64, f64) {
        tuple3(self.inner.ue)
    }

    #[getter]
    fn carrier_hz(&self) -> f64 {
        self.inner.rf.carrier_hz
    }

    fn ap_positions(&self) -> Vec<(f64, f64, f64)> {
        self.inner.aps.iter().map(|ap| tuple3(ap.position)).collect()
    }

    /// Ground-truth object positions in path order: UE, then one mirror
    /// image per surface, then each scatterer.
    fn object_positions(&self) -> Vec<(f64, f64, f64)> {
        let mut out = vec![tuple3(self.inner.ue)];
        for s in &self.inner.surfaces {
            out.push(tuple3(scene::mirror_point(self.inner.ue, s)));
        }
        for sp in &self.inner.scatterers {
            out.push(tuple3(sp.position));
        }
        out
    }

    fn __repr__(&self) -> String {
        format!(
            "Scenario(aps={}, surfaces={}, scatterers={})",
            self.inner.num_aps(),
            self.inner.surfaces.len(),
            self.inner.scatterers.len()
        )
    }
}

/// Reflects `point` through the plane given by `anchor` and `normal`.
#[pyfunction]
fn mirror_point(
    point: (f64, f64, f64),
    anchor: (f64, f64, f64),
    normal: (f64, f64, f64),
) -> PyResult<(f64, f64, f64)> {
    let surface = ReflectingSurface::new(vec3(anchor), vec3(normal), 1.0).map_err(to_py_err)?;
    Ok(tuple3(scene::mirror_point(vec3(point), &surface)))
}

/// Synthesizes one uplink snapshot; returns a list of `(re, im)` pairs,
/// one per AP. Common phases and noise are derived from `seed`.
#[pyfunction]
#[pyo3(signature = (scenario, seed, noise=true))]
fn synthesize(scenario: &PyScenario, seed: u64, noise: bool) -> PyResult<Vec<(f64, f64)>> {
    let phases = snapslam::cli::phases_from_seed(&scenario.inner, seed);
    let model = if noise { NoiseModel::Seeded(seed) } else { NoiseModel::Off };
    let y = forward::synthesize_snapshot(&scenario.inner, &phases, model).map_err(to_py_err)?;
    Ok(y.samples.iter().map(|s| (s.re, s.im)).collect())
}

/// Evaluates the imaging function over a grid.
///
/// `grid` is `(x_min, x_max, y_min, y_max, z, spacing)`. Returns
/// `(nx, ny, values)` with x varying fastest within `values`.
#[pyfunction]
fn compute_image(
    scenario: &PyScenario,
    snapshot: Vec<(f64, f64)>,
    grid: (f64, f64, f64, f64, f64, f64),
) -> PyResult<(usize, usize, Vec<f64>)> {
    let grid = grid_from_tuple(grid)?;
    let y = snapshot_from_list(snapshot);
    let img =
        imaging::compute_image(&y, &grid, &scenario.inner.aps, scenario.inner.rf.carrier_hz)
            .map_err(to_py_err)?;
    Ok((img.grid.nx(), img.grid.ny(), img.values))
}

/// Normalized spatial ambiguity between a probe point and a reference
/// point, in [0, 1].
#[pyfunction]
fn ambiguity(
    scenario: &PyScenario,
    probe: (f64, f64, f64),
    reference: (f64, f64, f64),
) -> f64 {
    imaging::ambiguity(
        vec3(probe),
        vec3(reference),
        &scenario.inner.aps,
        scenario.inner.rf.carrier_hz,
    )
}

/// Runs the iterative detect-and-cancel loop on a snapshot.
///
/// Returns one dict per detection with keys `iteration`, `position`,
/// `phase`, `peak_value`, and `residual_energy`.
#[pyfunction]
#[pyo3(signature = (scenario, snapshot, grid, max_targets=None, residual_eps=None))]
fn run_slam(
    py: Python<'_>,
    scenario: &PyScenario,
    snapshot: Vec<(f64, f64)>,
    grid: (f64, f64, f64, f64, f64, f64),
    max_targets: Option<usize>,
    residual_eps: Option<f64>,
) -> PyResult<Vec<Py<PyAny>>> {
    let grid = grid_from_tuple(grid)?;
    let y = snapshot_from_list(snapshot);
    let stop = StopRule { max_targets, residual_energy_frac: residual_eps };
    stop.validate().map_err(to_py_err)?;
    let dets = slam::run_slam(&y, &grid, &scenario.inner.aps, scenario.inner.rf.carrier_hz, stop)
        .map_err(to_py_err)?;
    dets.into_iter()
        .map(|d| {
            let dict = pyo3::types::PyDict::new(py);
            dict.set_item("iteration", d.iteration)?;
            dict.set_item("position", tuple3(d.position))?;
            dict.set_item("phase", d.phase)?;
            dict.set_item("peak_value", d.peak_value)?;
            dict.set_item("residual_energy", d.residual_energy)?;
            Ok(dict.into_any().unbind())
        })
        .collect()
}

/// Speed of light used throughout the core, in m/s.
#[pyfunction]
fn speed_of_light() -> f64 {
    snapslam::SPEED_OF_LIGHT
}

#[pymodule]
fn snapslam_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScenario>()?;
    m.add_function(wrap_pyfunction!(mirror_point, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize, m)?)?;
    m.add_function(wrap_pyfunction!(compute_image, m)?)?;
    m.add_function(wrap_pyfunction!(ambiguity, m)?)?;
    m.add_function(wrap_pyfunction!(run_slam, m)?)?;
    m.add_function(wrap_pyfunction!(speed_of_light, m)?)?;
    Ok(())
}
