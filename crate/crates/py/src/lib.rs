//! Python bindings for natred.

use std::collections::BTreeMap;
use std::path::PathBuf;

use natred::pipeline::{self, AlgebraSource, ExitStatus, Pipeline, RunConfig, SweepResult, SweepSpec};
use natred::presets::{self, AlgebraSpec, CATALOG};
use natred::report::VerificationReport;
use natred::tangent::{tangent_pipeline, TangentMetricParams};
use natred::{Error, KForm, Tolerance};
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

create_exception!(natred_py, NatredError, PyException);
create_exception!(natred_py, ConfigError, NatredError);
create_exception!(natred_py, DegenerateError, NatredError);

fn to_py(e: Error) -> PyErr {
    match ExitStatus::of_error(&e) {
        ExitStatus::ConfigError => ConfigError::new_err(e.to_string()),
        ExitStatus::Degenerate => DegenerateError::new_err(e.to_string()),
        _ => NatredError::new_err(e.to_string()),
    }
}

fn tolerance(tol: Option<f64>) -> PyResult<Tolerance> {
    match tol {
        None => Ok(Tolerance::default()),
        Some(t) => Tolerance::new(t, t).ok_or_else(|| ConfigError::new_err(format!("tolerance must be positive, got {t}"))),
    }
}

fn json_loads<'py>(py: Python<'py>, s: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (s,))
}

/// A Lie algebra given by structure constants in an orthonormal basis.
#[pyclass(name = "Algebra", module = "natred_py", frozen)]
struct PyAlgebra {
    spec: AlgebraSpec,
}

#[pymethods]
impl PyAlgebra {
    #[staticmethod]
    fn preset(name: &str) -> PyResult<Self> {
        presets::preset(name).map(|spec| PyAlgebra { spec }).map_err(to_py)
    }

    /// Reads an algebra file (1-based entries).
    #[staticmethod]
    #[pyo3(signature = (path, tol = 1e-9))]
    fn from_file(path: PathBuf, tol: f64) -> PyResult<Self> {
        presets::load_algebra(&path, tol).map(|spec| PyAlgebra { spec }).map_err(to_py)
    }

    #[staticmethod]
    #[pyo3(signature = (text, tol = 1e-9))]
    fn parse(text: &str, tol: f64) -> PyResult<Self> {
        presets::parse_algebra(text, tol).map(|spec| PyAlgebra { spec }).map_err(to_py)
    }

    #[getter]
    fn name(&self) -> &str {
        &self.spec.name
    }

    #[getter]
    fn dim(&self) -> usize {
        self.spec.dim()
    }

    /// C_ij^k, 0-based.
    fn constant(&self, i: usize, j: usize, k: usize) -> PyResult<f64> {
        let n = self.spec.dim();
        for idx in [i, j, k] {
            if idx >= n {
                return Err(to_py(Error::IndexOutOfRange { index: idx, dim: n }));
            }
        }
        Ok(self.spec.table.get(i, j, k))
    }

    /// Coordinates of [e_i, e_j].
    fn bracket(&self, i: usize, j: usize) -> PyResult<Vec<f64>> {
        (0..self.spec.dim()).map(|k| self.constant(i, j, k)).collect()
    }

    fn derived_dim(&self) -> usize {
        natred::lie::derived_dim(&self.spec.table)
    }

    fn center_dim(&self) -> usize {
        natred::lie::center(&self.spec.table).dim()
    }

    /// Runs the tangent-group pipeline on this algebra.
    #[pyo3(signature = (a, b, tol = None))]
    fn tangent(&self, py: Python<'_>, a: f64, b: f64, tol: Option<f64>) -> PyResult<PyReport> {
        let tol = tolerance(tol)?;
        let p = TangentMetricParams::new(a, b).map_err(to_py)?;
        let spec = &self.spec;
        py.detach(|| tangent_pipeline(spec, p, &tol)).map(|r| PyReport { inner: r }).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("Algebra('{}', dim={})", self.spec.name, self.spec.dim())
    }
}

/// Exterior form with sparse coefficients on increasing index tuples.
#[pyclass(name = "Form", module = "natred_py", frozen)]
struct PyForm {
    inner: KForm,
}

#[pymethods]
impl PyForm {
    #[new]
    fn new(dim: usize, degree: usize) -> Self {
        PyForm { inner: KForm::zero(dim, degree) }
    }

    /// e^{i1} ∧ ... ∧ e^{ik}.
    #[staticmethod]
    fn basis(dim: usize, idx: Vec<usize>) -> PyResult<Self> {
        KForm::basis(dim, &idx).map(|inner| PyForm { inner }).map_err(to_py)
    }

    /// Returns a copy with `value` added at `idx` (any order; the sign follows the permutation).
    fn with_term(&self, idx: Vec<usize>, value: f64) -> PyResult<Self> {
        let mut inner = self.inner.clone();
        inner.add_term(&idx, value).map_err(to_py)?;
        Ok(PyForm { inner })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn degree(&self) -> usize {
        self.inner.degree()
    }

    fn __getitem__(&self, idx: Vec<usize>) -> f64 {
        self.inner.eval(&idx)
    }

    fn terms(&self) -> Vec<(Vec<usize>, f64)> {
        self.inner.terms().map(|(k, v)| (k.clone(), *v)).collect()
    }

    fn wedge(&self, other: &PyForm) -> PyResult<Self> {
        self.inner.wedge(&other.inner).map(|inner| PyForm { inner }).map_err(to_py)
    }

    fn interior(&self, v: usize) -> PyResult<Self> {
        self.inner.interior(v).map(|inner| PyForm { inner }).map_err(to_py)
    }

    fn max_abs(&self) -> f64 {
        self.inner.max_abs()
    }

    fn __add__(&self, other: &PyForm) -> PyResult<Self> {
        self.inner.add(&other.inner).map(|inner| PyForm { inner }).map_err(to_py)
    }

    fn __sub__(&self, other: &PyForm) -> PyResult<Self> {
        self.inner.sub(&other.inner).map(|inner| PyForm { inner }).map_err(to_py)
    }

    fn __mul__(&self, s: f64) -> Self {
        PyForm { inner: self.inner.scale(s) }
    }

    fn __rmul__(&self, s: f64) -> Self {
        self.__mul__(s)
    }

    fn __xor__(&self, other: &PyForm) -> PyResult<Self> {
        self.wedge(other)
    }

    fn __repr__(&self) -> String {
        format!("Form(dim={}, degree={}, terms={})", self.inner.dim(), self.inner.degree(), self.inner.len())
    }
}

/// Verification report of one pipeline run.
#[pyclass(name = "Report", module = "natred_py", frozen)]
struct PyReport {
    inner: VerificationReport,
}

#[pymethods]
impl PyReport {
    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        VerificationReport::from_json(s).map(|inner| PyReport { inner }).map_err(to_py)
    }

    #[getter]
    fn pipeline(&self) -> &str {
        &self.inner.pipeline
    }

    #[getter]
    fn passed(&self) -> bool {
        self.inner.pass
    }

    #[getter]
    fn exit_code(&self) -> i32 {
        if self.inner.pass { ExitStatus::Pass } else { ExitStatus::Fail }.code()
    }

    #[getter]
    fn wall_time_s(&self) -> f64 {
        self.inner.wall_time_s.0
    }

    /// Names of the failing checks.
    fn failed(&self) -> Vec<String> {
        self.inner.checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect()
    }

    fn check_names(&self) -> Vec<String> {
        self.inner.checks.iter().map(|c| c.name.clone()).collect()
    }

    /// (values, residual, tolerance, pass) of a check, or None.
    fn check(&self, name: &str) -> Option<(Vec<f64>, f64, f64, bool)> {
        self.inner
            .check_named(name)
            .map(|c| (c.values.iter().map(|v| v.0).collect(), c.residual.0, c.tolerance.0, c.pass))
    }

    fn observation(&self, name: &str) -> Option<Vec<f64>> {
        self.inner.observation(name).map(|o| o.values.iter().map(|v| v.0).collect())
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        json_loads(py, &self.inner.to_json())
    }

    fn __repr__(&self) -> String {
        format!("Report('{}', passed={})", self.inner.pipeline, self.inner.pass)
    }
}

/// Result of a parameter sweep.
#[pyclass(name = "Sweep", module = "natred_py", frozen)]
struct PySweep {
    inner: SweepResult,
}

#[pymethods]
impl PySweep {
    #[getter]
    fn exit_code(&self) -> i32 {
        self.inner.status().code()
    }

    fn __len__(&self) -> usize {
        self.inner.points.len()
    }

    fn summary(&self) -> String {
        self.inner.summary()
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    /// Per-point records as plain dicts.
    fn points<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        json_loads(py, &self.inner.to_json())?.get_item("points")
    }
}

fn config(
    pipeline: &str,
    algebra: Option<String>,
    file: Option<PathBuf>,
    params: Option<BTreeMap<String, f64>>,
    samples: Option<usize>,
    seed: u64,
    tol: Option<f64>,
) -> PyResult<RunConfig> {
    let pipeline: Pipeline = pipeline.parse().map_err(to_py)?;
    let mut cfg = RunConfig::new(pipeline);
    cfg.algebra = match (algebra, file) {
        (Some(_), Some(_)) => return Err(ConfigError::new_err("give either algebra or file, not both")),
        (Some(name), None) => Some(AlgebraSource::Preset(name)),
        (None, Some(path)) => Some(AlgebraSource::File(path)),
        (None, None) => None,
    };
    cfg.params = params.unwrap_or_default();
    cfg.samples = samples;
    cfg.seed = seed;
    cfg.tolerance = tolerance(tol)?;
    Ok(cfg)
}

/// Runs one pipeline. Configuration and degenerate-parameter errors raise.
#[pyfunction]
#[pyo3(signature = (pipeline, algebra = None, file = None, params = None, samples = None, seed = pipeline::DEFAULT_SEED, tol = None))]
fn run(
    py: Python<'_>,
    pipeline: &str,
    algebra: Option<String>,
    file: Option<PathBuf>,
    params: Option<BTreeMap<String, f64>>,
    samples: Option<usize>,
    seed: u64,
    tol: Option<f64>,
) -> PyResult<PyReport> {
    let cfg = config(pipeline, algebra, file, params, samples, seed, tol)?;
    let out = py.detach(|| pipeline::run(&cfg));
    match (out.report, out.error) {
        (Some(inner), _) => Ok(PyReport { inner }),
        (None, Some(e)) => Err(match out.status {
            ExitStatus::ConfigError => ConfigError::new_err(e),
            ExitStatus::Degenerate => DegenerateError::new_err(e),
            _ => NatredError::new_err(e),
        }),
        (None, None) => Err(NatredError::new_err("pipeline produced no report")),
    }
}

/// Runs a pipeline over a grid (dict of value lists) or `random` seeded points.
#[pyfunction]
#[pyo3(signature = (pipeline, grid = None, random = None, algebra = None, file = None, samples = None, seed = pipeline::DEFAULT_SEED, tol = None))]
fn sweep(
    py: Python<'_>,
    pipeline: &str,
    grid: Option<BTreeMap<String, Vec<f64>>>,
    random: Option<usize>,
    algebra: Option<String>,
    file: Option<PathBuf>,
    samples: Option<usize>,
    seed: u64,
    tol: Option<f64>,
) -> PyResult<PySweep> {
    let base = config(pipeline, algebra, file, None, samples, seed, tol)?;
    let spec = match (grid, random) {
        (Some(_), Some(_)) => return Err(ConfigError::new_err("give either grid or random, not both")),
        (_, Some(samples)) => SweepSpec::Random { samples },
        (grid, None) => SweepSpec::Grid(grid.unwrap_or_default()),
    };
    py.detach(|| pipeline::sweep(&base, &spec)).map(|inner| PySweep { inner }).map_err(to_py)
}

/// Seeded point on the unit 7-sphere, as used by the s7 pipeline.
#[pyfunction]
#[pyo3(signature = (i, seed = pipeline::DEFAULT_SEED))]
fn sphere_sample(i: u64, seed: u64) -> Vec<f64> {
    pipeline::sphere_sample(seed, i).vector().iter().copied().collect()
}

#[pymodule]
fn natred_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyAlgebra>()?;
    m.add_class::<PyForm>()?;
    m.add_class::<PyReport>()?;
    m.add_class::<PySweep>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(sphere_sample, m)?)?;
    m.add("NatredError", m.py().get_type::<NatredError>())?;
    m.add("ConfigError", m.py().get_type::<ConfigError>())?;
    m.add("DegenerateError", m.py().get_type::<DegenerateError>())?;
    m.add("PRESETS", CATALOG.to_vec())?;
    m.add("PIPELINES", Pipeline::ALL.iter().map(|p| p.name()).collect::<Vec<_>>())?;
    m.add("DEFAULT_SEED", pipeline::DEFAULT_SEED)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
