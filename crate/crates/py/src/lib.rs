//! Python bindings: `import matern_torus`.

use std::path::PathBuf;

use matern_torus::experiments::{self, MinGammaOptions, SchemeChoice};
use matern_torus::specfun::{self, BesselEvalConfig};
use matern_torus::{io, sampler, torus};
use matern_torus::{CutoffSpec, PeriodizationScheme, RngStream};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn err(e: matern_torus::Error) -> PyErr {
    match e {
        matern_torus::Error::Io { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn from_json<'py>(py: Python<'py>, s: String) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (s,))
}

fn to_json(v: &impl serde::Serialize) -> PyResult<String> {
    serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

#[pyfunction]
fn bessel_k(nu: f64, t: f64) -> PyResult<f64> {
    specfun::bessel_k(nu, t, &BesselEvalConfig::default()).map_err(err)
}

#[pyfunction]
fn ln_bessel_k(nu: f64, t: f64) -> PyResult<f64> {
    specfun::ln_bessel_k(nu, t, &BesselEvalConfig::default()).map_err(err)
}

#[pyfunction]
fn log_gamma(x: f64) -> PyResult<f64> {
    specfun::log_gamma(x).map_err(err)
}

#[pyclass(frozen, skip_from_py_object, name = "CovarianceModel")]
#[derive(Clone)]
struct PyModel(matern_torus::CovarianceModel);

#[pymethods]
impl PyModel {
    #[new]
    #[pyo3(signature = (lam, nu, d))]
    fn new(lam: f64, nu: f64, d: usize) -> PyResult<Self> {
        matern_torus::CovarianceModel::new(lam, nu, d).map(PyModel).map_err(err)
    }

    #[getter]
    fn lam(&self) -> f64 {
        self.0.lambda()
    }

    #[getter]
    fn nu(&self) -> f64 {
        self.0.nu()
    }

    #[getter]
    fn d(&self) -> usize {
        self.0.dim()
    }

    fn rho(&self, x: Vec<f64>) -> PyResult<f64> {
        if x.len() != self.0.dim() {
            return Err(PyValueError::new_err(format!("expected {} coordinates", self.0.dim())));
        }
        Ok(self.0.rho(&x))
    }

    fn rho_radial(&self, r: f64) -> f64 {
        self.0.rho_radial(r)
    }

    fn spectral_density(&self, w: f64) -> f64 {
        self.0.spectral_density_radial(w)
    }

    fn __repr__(&self) -> String {
        format!("CovarianceModel(lam={}, nu={}, d={})", self.0.lambda(), self.0.nu(), self.0.dim())
    }
}

#[pyclass(frozen, skip_from_py_object, name = "TorusGrid")]
#[derive(Clone)]
struct PyGrid(matern_torus::TorusGrid);

#[pymethods]
impl PyGrid {
    #[new]
    #[pyo3(signature = (d, n, h, e0 = 0.5))]
    fn new(d: usize, n: usize, h: f64, e0: f64) -> PyResult<Self> {
        matern_torus::TorusGrid::new(d, n, h, e0).map(PyGrid).map_err(err)
    }

    /// Smallest even `n` with `n h / 2 >= gamma`.
    #[staticmethod]
    #[pyo3(signature = (d, gamma, h, e0 = 0.5))]
    fn from_gamma(d: usize, gamma: f64, h: f64, e0: f64) -> PyResult<Self> {
        matern_torus::TorusGrid::from_gamma(d, gamma, h, e0).map(PyGrid).map_err(err)
    }

    #[getter]
    fn d(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn h(&self) -> f64 {
        self.0.h()
    }

    #[getter]
    fn e0(&self) -> f64 {
        self.0.e0()
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.0.gamma()
    }

    /// Sampling-box points per axis.
    #[getter]
    fn m(&self) -> usize {
        self.0.domain_points_per_axis()
    }

    fn __repr__(&self) -> String {
        format!("TorusGrid(d={}, n={}, h={}, e0={})", self.0.dim(), self.0.n(), self.0.h(), self.0.e0())
    }
}

fn build_scheme(
    model: &matern_torus::CovarianceModel,
    grid: &matern_torus::TorusGrid,
    scheme: &str,
    p: Option<u32>,
    kappa: Option<f64>,
    r0: Option<f64>,
) -> PyResult<PeriodizationScheme> {
    let r = PeriodizationScheme::difference_radius(grid.dim(), grid.e0());
    let k = kappa.unwrap_or(2.0 * grid.gamma() - r);
    let s = match scheme {
        "classical" if p.is_none() && kappa.is_none() && r0.is_none() => PeriodizationScheme::Classical,
        "classical" => return Err(PyValueError::new_err("p, kappa and r0 apply to the smooth schemes only")),
        "bspline" if r0.is_none() => {
            let p = p.unwrap_or_else(|| PeriodizationScheme::default_p(model.nu(), model.dim()));
            PeriodizationScheme::Smooth(CutoffSpec::bspline(k, p).map_err(err)?)
        }
        "bspline" => return Err(PyValueError::new_err("the B-spline cutoff has inner radius kappa/2")),
        "expsmooth" if p.is_none() => {
            PeriodizationScheme::Smooth(CutoffSpec::exp_smooth(k, r0.unwrap_or(r)).map_err(err)?)
        }
        "expsmooth" => return Err(PyValueError::new_err("p applies to the B-spline cutoff only")),
        other => return Err(PyValueError::new_err(format!("unknown scheme {other:?}"))),
    };
    s.validate(grid).map_err(err)?;
    Ok(s)
}

#[pyclass(frozen, name = "SpectralFactor")]
struct PyFactor(matern_torus::SpectralFactor);

#[pymethods]
impl PyFactor {
    /// Eigenvalues of the embedding in FFT order.
    #[getter]
    fn eigenvalues(&self) -> Vec<f64> {
        self.0.eigs.clone()
    }

    #[getter]
    fn min_eig(&self) -> f64 {
        self.0.min_eig
    }

    #[getter]
    fn max_eig(&self) -> f64 {
        self.0.max_eig
    }

    #[getter]
    fn trace(&self) -> f64 {
        self.0.trace
    }

    #[getter]
    fn is_pd(&self) -> bool {
        self.0.is_pd
    }

    #[getter]
    fn pd_margin(&self) -> f64 {
        self.0.pd_margin()
    }

    #[getter]
    fn model(&self) -> PyModel {
        PyModel(self.0.model)
    }

    #[getter]
    fn grid(&self) -> PyGrid {
        PyGrid(self.0.grid)
    }

    #[getter]
    fn scheme(&self) -> &'static str {
        self.0.scheme.name()
    }

    fn digest(&self) -> String {
        io::factor_digest(&self.0)
    }

    /// Sorted eigenvalues and their power-law fit, as a dict.
    #[pyo3(signature = (window = None))]
    fn decay_fit<'py>(&self, py: Python<'py>, window: Option<(usize, usize)>) -> PyResult<Bound<'py, PyAny>> {
        let fit = torus::decay_fit(&self.0, window).map_err(err)?;
        from_json(py, to_json(&fit)?)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        io::save_factor(&path, &self.0).map_err(err)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        io::load_factor(&path).map(PyFactor).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "SpectralFactor(scheme={}, n={}, is_pd={}, margin={:e})",
            self.0.scheme.name(),
            self.0.grid.n(),
            self.0.is_pd,
            self.0.pd_margin()
        )
    }
}

#[pyfunction]
#[pyo3(signature = (model, grid, scheme = "classical", p = None, kappa = None, r0 = None))]
fn factorize(
    model: &PyModel,
    grid: &PyGrid,
    scheme: &str,
    p: Option<u32>,
    kappa: Option<f64>,
    r0: Option<f64>,
) -> PyResult<PyFactor> {
    let s = build_scheme(&model.0, &grid.0, scheme, p, kappa, r0)?;
    matern_torus::SpectralFactor::factorize(&model.0, &grid.0, &s)
        .map(PyFactor)
        .map_err(err)
}

#[pyclass(frozen, name = "SampleBatch")]
struct PyBatch(matern_torus::SampleBatch);

#[pymethods]
impl PyBatch {
    #[getter]
    fn count(&self) -> usize {
        self.0.count
    }

    #[getter]
    fn d(&self) -> usize {
        self.0.d
    }

    #[getter]
    fn m(&self) -> usize {
        self.0.m
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.0.seed
    }

    #[getter]
    fn stream(&self) -> u64 {
        self.0.stream
    }

    #[getter]
    fn factor_digest(&self) -> String {
        self.0.factor_digest.clone()
    }

    /// One list of `m^d` values per realization, row-major over the box.
    fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.0.count).map(|i| self.0.row(i).to_vec()).collect()
    }

    /// Column of the box point with signed grid coordinates `c`.
    fn column_of(&self, c: Vec<i64>) -> Option<usize> {
        self.0.column_of(&c)
    }

    fn save(&self, path: PathBuf, factor: &PyFactor) -> PyResult<()> {
        io::save_batch(&path, &io::TgrfHeader::of(&factor.0), &self.0).map_err(err)
    }

    fn save_csv(&self, path: PathBuf) -> PyResult<()> {
        io::save_batch_csv(&path, &self.0).map_err(err)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        io::load_batch(&path).map(|(_, b)| PyBatch(b)).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.0.count
    }
}

#[pyfunction]
#[pyo3(signature = (factor, count, seed = 0, stream = 0))]
fn draw(py: Python<'_>, factor: &PyFactor, count: usize, seed: u64, stream: u64) -> PyResult<PyBatch> {
    let f = &factor.0;
    py.detach(|| sampler::draw(f, &mut RngStream::new(seed, stream), count))
        .map(PyBatch)
        .map_err(err)
}

/// Empirical covariance at a set of lags against the exact kernel, as a dict.
#[pyfunction]
#[pyo3(signature = (factor, count, seed = 0, stream = 0))]
fn validate<'py>(
    py: Python<'py>,
    factor: &PyFactor,
    count: usize,
    seed: u64,
    stream: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let f = &factor.0;
    let report = py
        .detach(|| sampler::validation_report(f, &mut RngStream::new(seed, stream), count))
        .map_err(err)?;
    from_json(py, to_json(&report)?)
}

/// Minimal even torus size with a PSD embedding, as a dict.
#[pyfunction]
#[pyo3(signature = (model, h, scheme = "classical", e0 = 0.5, p = None, n_max = None))]
fn min_gamma<'py>(
    py: Python<'py>,
    model: &PyModel,
    h: f64,
    scheme: &str,
    e0: f64,
    p: Option<u32>,
    n_max: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let choice = match (scheme, p) {
        ("classical", None) => SchemeChoice::Classical,
        ("bspline", p) => SchemeChoice::BSpline { p },
        ("expsmooth", None) => SchemeChoice::ExpSmooth,
        ("classical" | "expsmooth", Some(_)) => {
            return Err(PyValueError::new_err("p applies to the B-spline cutoff only"))
        }
        (other, _) => return Err(PyValueError::new_err(format!("unknown scheme {other:?}"))),
    };
    let opts = MinGammaOptions { n_max, ..Default::default() };
    let m = model.0;
    let r = py
        .detach(|| experiments::min_gamma(&m, h, e0, choice, &opts))
        .map_err(err)?;
    from_json(py, to_json(&r)?)
}

#[pymodule(name = "matern_torus")]
fn init(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(bessel_k, m)?)?;
    m.add_function(wrap_pyfunction!(ln_bessel_k, m)?)?;
    m.add_function(wrap_pyfunction!(log_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(factorize, m)?)?;
    m.add_function(wrap_pyfunction!(draw, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(min_gamma, m)?)?;
    m.add_class::<PyModel>()?;
    m.add_class::<PyGrid>()?;
    m.add_class::<PyFactor>()?;
    m.add_class::<PyBatch>()?;
    Ok(())
}
