//! Python bindings. Fields, sets and configs cross the boundary as JSON
//! (a `str` or anything `json.dumps` accepts); results come back as plain
//! Python objects.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

use fraclab::fraclap::{self, EvalResult, FracOrder, QuadratureSpec, RieszKernel};
use fraclab::fields::ScalarField;
use fraclab::sets::{self, CompactSet as CoreSet};
use fraclab::verify;
use fraclab_cli::{Command, ExperimentConfig, RunContext, RunError};

fn core_err(e: fraclab::Error) -> PyErr {
    match e {
        fraclab::Error::InvalidParameter(_) | fraclab::Error::SigmaTooLarge { .. } | fraclab::Error::EpsTooLarge { .. } => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn json_text(obj: &Bound<'_, PyAny>) -> PyResult<String> {
    if let Ok(s) = obj.extract::<String>() {
        return Ok(s);
    }
    obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()
}

fn from_py<T: DeserializeOwned>(obj: &Bound<'_, PyAny>) -> PyResult<T> {
    serde_json::from_str(&json_text(obj)?).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn to_py<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn quadrature(obj: Option<&Bound<'_, PyAny>>) -> PyResult<QuadratureSpec> {
    let spec: QuadratureSpec = obj.map(from_py).transpose()?.unwrap_or_default();
    spec.validate().map_err(core_err)?;
    Ok(spec)
}

fn eval_py<'py>(py: Python<'py>, r: fraclab::Result<EvalResult>) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &r.map_err(core_err)?)
}

/// A scalar field on R^n, built from `{"dim": n, "kind": ..., "params": {...}}`.
#[pyclass(frozen, module = "fraclab")]
struct Field(ScalarField);

#[pymethods]
impl Field {
    #[new]
    fn new(spec: &Bound<'_, PyAny>) -> PyResult<Self> {
        from_py(spec).map(Field)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim
    }

    #[getter]
    fn radial(&self) -> bool {
        self.0.radial
    }

    /// Far-field exponent, `None` for rapidly decaying fields.
    #[getter]
    fn decay_hint(&self) -> Option<f64> {
        self.0.decay_hint
    }

    fn spec<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.0)
    }

    fn __call__(&self, x: Vec<f64>) -> PyResult<f64> {
        self.0.eval(&x).map_err(core_err)
    }

    fn eval(&self, x: Vec<f64>) -> PyResult<f64> {
        self.0.eval(&x).map_err(core_err)
    }

    fn smooth_radius(&self, x: Vec<f64>) -> f64 {
        self.0.smooth_radius(&x)
    }

    /// `(-Δ)^σ` at `x` by real-space quadrature.
    #[pyo3(signature = (sigma, x, quadrature=None))]
    fn frac_laplacian<'py>(&self, py: Python<'py>, sigma: f64, x: Vec<f64>, quadrature: Option<&Bound<'py, PyAny>>) -> PyResult<Bound<'py, PyAny>> {
        let spec = self::quadrature(quadrature)?;
        let order = FracOrder::new(self.0.dim, sigma).map_err(core_err)?;
        eval_py(py, py.detach(|| fraclap::frac_laplacian(&self.0, &order, &x, &spec)))
    }

    /// `(-Δ)^σ` at radius `r` of a radial field by the one-dimensional route.
    #[pyo3(signature = (sigma, r, quadrature=None))]
    fn frac_laplacian_radial<'py>(&self, py: Python<'py>, sigma: f64, r: f64, quadrature: Option<&Bound<'py, PyAny>>) -> PyResult<Bound<'py, PyAny>> {
        let spec = self::quadrature(quadrature)?;
        let order = FracOrder::new(self.0.dim, sigma).map_err(core_err)?;
        eval_py(py, py.detach(|| fraclap::frac_laplacian_radial(&self.0, &order, r, &spec)))
    }

    /// `(-Δ)^σ` at radius `r` through the Hankel transform.
    fn fourier_oracle<'py>(&self, py: Python<'py>, sigma: f64, r: f64) -> PyResult<Bound<'py, PyAny>> {
        let order = FracOrder::new(self.0.dim, sigma).map_err(core_err)?;
        eval_py(py, py.detach(|| fraclap::fourier_oracle(&self.0, &order, r)))
    }

    /// Riesz potential `I_{2γ}` of this field at `x`.
    #[pyo3(signature = (gamma, x, quadrature=None))]
    fn riesz_potential<'py>(&self, py: Python<'py>, gamma: f64, x: Vec<f64>, quadrature: Option<&Bound<'py, PyAny>>) -> PyResult<Bound<'py, PyAny>> {
        let spec = self::quadrature(quadrature)?;
        let kernel = RieszKernel::new(self.0.dim, gamma).map_err(core_err)?;
        eval_py(py, py.detach(|| fraclap::riesz_potential(&self.0, &kernel, &x, &spec)))
    }

    /// `∫ φ (-Δ)^σ φ`.
    #[pyo3(signature = (sigma, quadrature=None))]
    fn quadratic_energy<'py>(&self, py: Python<'py>, sigma: f64, quadrature: Option<&Bound<'py, PyAny>>) -> PyResult<Bound<'py, PyAny>> {
        let spec = self::quadrature(quadrature)?;
        let order = FracOrder::new(self.0.dim, sigma).map_err(core_err)?;
        eval_py(py, py.detach(|| fraclap::quadratic_energy(&self.0, &order, &spec)))
    }

    fn __repr__(&self) -> String {
        format!("Field({})", serde_json::to_string(&self.0).unwrap_or_default())
    }
}

/// A compact set in R^n, built from `{"dim": n, "variant": ..., params}`.
#[pyclass(frozen, module = "fraclab")]
struct CompactSet(CoreSet);

#[pymethods]
impl CompactSet {
    #[new]
    fn new(spec: &Bound<'_, PyAny>) -> PyResult<Self> {
        from_py(spec).map(CompactSet)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim
    }

    #[getter]
    fn diam(&self) -> f64 {
        self.0.diam
    }

    #[getter]
    fn manifold_dim(&self) -> Option<usize> {
        self.0.manifold_dim()
    }

    #[getter]
    fn reach(&self) -> f64 {
        self.0.reach()
    }

    fn spec<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.0)
    }

    fn distance(&self, x: Vec<f64>) -> PyResult<f64> {
        self.check(&x)?;
        Ok(self.0.distance(&x))
    }

    /// Nearest point and whether it is unique.
    fn nearest_point(&self, x: Vec<f64>) -> PyResult<(Vec<f64>, bool)> {
        self.check(&x)?;
        let (p, tied) = self.0.nearest_point(&x).map_err(core_err)?;
        Ok((p, !tied))
    }

    fn distance_gradient(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.check(&x)?;
        self.0.distance_gradient(&x).map_err(core_err)
    }

    fn covering_number(&self, r: f64, big_r: f64, center: Vec<f64>) -> PyResult<usize> {
        self.check(&center)?;
        Ok(sets::covering_number(&self.0, r, big_r, &center))
    }

    fn __repr__(&self) -> String {
        format!("CompactSet({})", serde_json::to_string(&self.0).unwrap_or_default())
    }
}

impl CompactSet {
    fn check(&self, x: &[f64]) -> PyResult<()> {
        if x.len() == self.0.dim {
            Ok(())
        } else {
            Err(PyValueError::new_err(format!("point has dimension {}, set has {}", x.len(), self.0.dim)))
        }
    }
}

/// `C_{n,s}` for `0 < s < 1`.
#[pyfunction]
fn normalization_constant(n: usize, s: f64) -> PyResult<f64> {
    if !(n > 0 && s > 0.0 && s < 1.0) {
        return Err(PyValueError::new_err("need n >= 1 and 0 < s < 1"));
    }
    Ok(fraclap::normalization_constant(n, s))
}

/// Exponent ladder of the integrability bootstrap for `u = I_{2γ}(u^p)`.
#[pyfunction]
fn bootstrap_exponents<'py>(py: Python<'py>, n: usize, gamma: f64, p: f64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &verify::bootstrap_exponents(n, gamma, p).map_err(core_err)?)
}

/// Runs one CLI command in process and returns the report plus its tables.
#[pyfunction]
#[pyo3(signature = (command, config=None, seed=None, workers=None))]
fn run<'py>(
    py: Python<'py>,
    command: &str,
    config: Option<&Bound<'py, PyAny>>,
    seed: Option<u64>,
    workers: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let cmd: Command = serde_json::from_value(serde_json::Value::String(command.to_owned()))
        .map_err(|_| PyValueError::new_err(format!("unknown command {command:?}")))?;
    let cfg = match config {
        Some(c) => ExperimentConfig::from_json(&json_text(c)?).map_err(|e| PyValueError::new_err(e.to_string()))?,
        None => ExperimentConfig::default(),
    };
    let ctx = RunContext::resolve(&cfg, seed, workers);
    let outcome = py.detach(|| fraclab_cli::execute(cmd, &cfg, ctx)).map_err(|e| match e {
        RunError::Config(c) => PyValueError::new_err(c.to_string()),
        RunError::Numerical(n) => core_err(n),
    })?;
    let mut report = serde_json::to_value(&outcome).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    report["tables"] = serde_json::to_value(&outcome.tables).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    to_py(py, &report)
}

#[pymodule]
#[pyo3(name = "fraclab")]
fn fraclab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Field>()?;
    m.add_class::<CompactSet>()?;
    m.add_function(wrap_pyfunction!(normalization_constant, m)?)?;
    m.add_function(wrap_pyfunction!(bootstrap_exponents, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
