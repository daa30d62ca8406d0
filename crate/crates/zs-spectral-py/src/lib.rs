//! Python module `zs_spectral`.

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use zs_spectral::classify::{full_spectrum, is_standard, EigenvalueRecord};
use zs_spectral::discriminant::{build_qpoly, discriminant_report, Which};
use zs_spectral::gradients::{gradcheck as grad_check, Target};
use zs_spectral::oracle::{compare, OracleSpectrum};
use zs_spectral::rootfinder::{roots_in_disk as find_roots, select_r as choose_r};
use zs_spectral::transfer::fundamental_matrix;
use zs_spectral::{CharKind, Disk, Error, SpectrumReport, Tolerances};

create_exception!(zs_spectral, SpectralError, PyException);

fn err(e: Error) -> PyErr {
    match e {
        Error::InvalidInput(_) | Error::ZeroInput(_) => PyValueError::new_err(e.to_string()),
        _ => SpectralError::new_err(e.to_string()),
    }
}

fn tolerances(overrides: Option<HashMap<String, f64>>) -> PyResult<Tolerances> {
    let mut tol = Tolerances::default();
    for (k, v) in overrides.unwrap_or_default() {
        tol.set(&k, v).map_err(err)?;
    }
    Ok(tol)
}

fn json_to_py<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(name = "Potential", module = "zs_spectral", from_py_object)]
#[derive(Clone)]
struct PyPotential {
    inner: zs_spectral::Potential,
}

#[pymethods]
impl PyPotential {
    /// `(a e^{2πikx}, −conj(a) e^{−2πikx})`.
    #[staticmethod]
    #[pyo3(signature = (a, k = 0))]
    fn constant(a: Complex64, k: i64) -> Self {
        PyPotential { inner: zs_spectral::Potential::constant(a, k) }
    }

    #[staticmethod]
    fn zero() -> Self {
        PyPotential { inner: zs_spectral::Potential::zero() }
    }

    /// Focusing potential from the Fourier coefficients of φ₁, indexed −K..K.
    #[staticmethod]
    fn focusing(coeffs: Vec<Complex64>) -> PyResult<Self> {
        Ok(PyPotential { inner: zs_spectral::Potential::make_focusing(coeffs).map_err(err)? })
    }

    #[staticmethod]
    #[pyo3(signature = (seed, band = 3, norm = 0.5))]
    fn random_focusing(seed: u64, band: usize, norm: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        PyPotential { inner: zs_spectral::Potential::random_focusing(&mut rng, band, norm) }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyPotential { inner: zs_spectral::Potential::from_json(text).map_err(err)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn gauge_shift(&self, k: i64) -> Self {
        PyPotential { inner: self.inner.gauge_shift(k) }
    }

    fn evaluate(&self, x: f64) -> (Complex64, Complex64) {
        self.inner.evaluate(x)
    }

    #[getter]
    fn band(&self) -> usize {
        self.inner.band()
    }

    #[getter]
    fn is_focusing(&self) -> bool {
        self.inner.is_focusing()
    }

    fn __repr__(&self) -> String {
        format!("Potential({})", self.inner.to_json())
    }
}

type Record = (Complex64, usize, Option<u8>, String);

fn record(r: &EigenvalueRecord) -> Record {
    (r.value, r.m_alg, r.m_geom, r.parity.name().to_string())
}

#[pyclass(name = "Spectrum", module = "zs_spectral", frozen)]
struct PySpectrum {
    inner: SpectrumReport,
}

#[pymethods]
impl PySpectrum {
    #[getter(R)]
    fn r(&self) -> usize {
        self.inner.r
    }

    #[getter]
    fn n_scan(&self) -> usize {
        self.inner.n_scan
    }

    #[getter]
    fn standard(&self) -> bool {
        self.inner.verdicts.standard
    }

    #[getter]
    fn r_simple(&self) -> bool {
        self.inner.verdicts.r_simple
    }

    #[getter]
    fn dirichlet_simple(&self) -> bool {
        self.inner.verdicts.dirichlet_simple
    }

    /// `(value, m_alg, m_geom, parity)` for periodic and anti-periodic records.
    fn periodic(&self) -> Vec<Record> {
        self.inner.periodic().map(record).collect()
    }

    /// `(value, m_alg, None, "dirichlet")`.
    fn dirichlet(&self) -> Vec<Record> {
        self.inner.dirichlet().map(record).collect()
    }

    /// Reasons the spectrum is not standard (empty when it is).
    fn nonstandard_reasons(&self) -> Vec<String> {
        is_standard(&self.inner).1
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    fn __repr__(&self) -> String {
        format!(
            "Spectrum(R={}, records={}, standard={})",
            self.inner.r,
            self.inner.records.len(),
            if self.inner.verdicts.standard { "True" } else { "False" }
        )
    }
}

/// `M(1, λ)` as `[[m1, m2], [m3, m4]]`.
#[pyfunction]
fn floquet_matrix(p: &PyPotential, lam: Complex64) -> PyResult<[[Complex64; 2]; 2]> {
    let m = fundamental_matrix(&p.inner, lam, false, false).map_err(err)?.endpoint;
    Ok([[m[0], m[1]], [m[2], m[3]]])
}

#[pyfunction]
#[pyo3(signature = (p, r = None, n_scan = 8, tol = None))]
fn spectrum(
    py: Python<'_>,
    p: &PyPotential,
    r: Option<usize>,
    n_scan: usize,
    tol: Option<HashMap<String, f64>>,
) -> PyResult<PySpectrum> {
    let tol = tolerances(tol)?;
    let report = py.detach(|| full_spectrum(&p.inner, r, n_scan, &tol)).map_err(err)?;
    Ok(PySpectrum { inner: report })
}

#[pyfunction]
#[pyo3(signature = (p, n_scan = 8, tol = None))]
fn select_r(py: Python<'_>, p: &PyPotential, n_scan: usize, tol: Option<HashMap<String, f64>>) -> PyResult<usize> {
    let tol = tolerances(tol)?;
    py.detach(|| choose_r(&p.inner, n_scan, &tol)).map_err(err)
}

/// `(value, multiplicity)` for each root cluster of `kind` in the disk.
#[pyfunction]
#[pyo3(signature = (p, center, radius, kind = "chi_p", tol = None))]
fn roots_in_disk(
    py: Python<'_>,
    p: &PyPotential,
    center: Complex64,
    radius: f64,
    kind: &str,
    tol: Option<HashMap<String, f64>>,
) -> PyResult<Vec<(Complex64, usize)>> {
    let tol = tolerances(tol)?;
    let kind: CharKind = kind.parse().map_err(err)?;
    let disk = Disk::new(center, radius).map_err(err)?;
    let roots = py.detach(|| find_roots(&p.inner, disk, kind, &tol)).map_err(err)?;
    Ok(roots.into_iter().map(|r| (r.value, r.multiplicity)).collect())
}

/// Analytic gradient against central differences; returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (p, lam, kind = "floquet", directions = 8, seed = 0, tol = None))]
fn gradcheck<'py>(
    py: Python<'py>,
    p: &PyPotential,
    lam: Complex64,
    kind: &str,
    directions: usize,
    seed: u64,
    tol: Option<HashMap<String, f64>>,
) -> PyResult<Bound<'py, PyAny>> {
    let tol = tolerances(tol)?;
    let targets = match kind {
        "delta" => vec![Target::Delta],
        "trace" => vec![Target::Trace],
        "chi_D" | "chiD" => vec![Target::ChiD],
        "floquet" => (0..4).map(Target::Floquet).collect(),
        _ => return Err(PyValueError::new_err(format!("unknown gradient kind {kind:?}"))),
    };
    let check = py.detach(|| grad_check(&p.inner, lam, &targets, directions, seed, &tol)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("max_rel_error", check.max_rel_error)?;
    d.set_item("pass", check.pass)?;
    d.set_item("rows", check.rows.len())?;
    Ok(d.into_any())
}

#[pyfunction]
#[pyo3(signature = (p, r, which = "periodic", tol = None))]
fn discriminant<'py>(
    py: Python<'py>,
    p: &PyPotential,
    r: usize,
    which: &str,
    tol: Option<HashMap<String, f64>>,
) -> PyResult<Bound<'py, PyAny>> {
    let tol = tolerances(tol)?;
    let which: Which = which.parse().map_err(err)?;
    let rep = py
        .detach(|| build_qpoly(&p.inner, r, which, &tol).and_then(|q| discriminant_report(&q)))
        .map_err(err)?;
    json_to_py(py, &rep.to_json())
}

/// Numeric spectrum of a constant potential against the closed form.
#[pyfunction]
#[pyo3(signature = (p, n_scan = 8, value_tol = 1e-7, tol = None))]
fn oracle_compare<'py>(
    py: Python<'py>,
    p: &PyPotential,
    n_scan: usize,
    value_tol: f64,
    tol: Option<HashMap<String, f64>>,
) -> PyResult<Bound<'py, PyAny>> {
    let zs_spectral::Potential::Constant { a, k } = p.inner else {
        return Err(PyValueError::new_err("oracle_compare needs a constant potential"));
    };
    let tol = tolerances(tol)?;
    let report = py.detach(|| full_spectrum(&p.inner, None, n_scan, &tol)).map_err(err)?;
    let oracle = OracleSpectrum::new(a, k, n_scan + k.unsigned_abs() as usize + 4);
    let cmp = compare(&report, &oracle, value_tol);
    let d = PyDict::new(py);
    d.set_item("pass", cmp.pass)?;
    d.set_item("rows", cmp.rows.len())?;
    d.set_item("max_value_error", cmp.rows.iter().filter_map(|r| r.value_error).fold(0.0, f64::max))?;
    Ok(d.into_any())
}

#[pymodule(name = "zs_spectral")]
fn zs_spectral_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SpectralError", m.py().get_type::<SpectralError>())?;
    m.add_class::<PyPotential>()?;
    m.add_class::<PySpectrum>()?;
    m.add_function(wrap_pyfunction!(floquet_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(select_r, m)?)?;
    m.add_function(wrap_pyfunction!(roots_in_disk, m)?)?;
    m.add_function(wrap_pyfunction!(gradcheck, m)?)?;
    m.add_function(wrap_pyfunction!(discriminant, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_compare, m)?)?;
    Ok(())
}
