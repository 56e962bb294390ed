//! Python bindings: qudit states, phase matrices, splittings, the
//! teleportation model and coherent-span vectors.

use coherent_teleport::fock::{self, FactorSelection};
use coherent_teleport::hilbert::{validate_splitting, ModeVector, Region};
use coherent_teleport::linalg::{CMatrix, CVector};
use coherent_teleport::teleport::{self, Variant};
use coherent_teleport::{
    BMatrix, Error, FockVector, QuditState, Splitting, SplittingKind, TeleportModel,
};
use num_complex::Complex64 as C64;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: Error) -> PyErr {
    match e {
        Error::InvalidParameter(_)
        | Error::InvalidState(_)
        | Error::DimensionMismatch { .. }
        | Error::ModeMismatch { .. }
        | Error::InvalidSplitting(_)
        | Error::InvalidBMatrix { .. }
        | Error::UnsupportedRegion(_) => PyValueError::new_err(e.to_string()),
        _ => PyArithmeticError::new_err(e.to_string()),
    }
}

fn rows(m: &CMatrix) -> Vec<Vec<C64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn matrix(rows: Vec<Vec<C64>>) -> PyResult<CMatrix> {
    let cols = rows.first().map_or(0, Vec::len);
    if cols == 0 || rows.iter().any(|r| r.len() != cols) {
        return Err(PyValueError::new_err("expected a non-empty rectangular list of rows"));
    }
    Ok(CMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

fn mode(h: Vec<C64>) -> PyResult<ModeVector> {
    ModeVector::new(h).map_err(err)
}

fn variant(name: &str) -> PyResult<Variant> {
    name.parse().map_err(err)
}

#[pyclass(name = "QuditState", module = "pyteleport", from_py_object)]
#[derive(Clone)]
struct PyQudit {
    inner: QuditState,
}

#[pymethods]
impl PyQudit {
    #[staticmethod]
    fn basis(n: usize, k: usize) -> PyResult<Self> {
        Ok(PyQudit { inner: QuditState::basis(n, k).map_err(err)? })
    }

    #[staticmethod]
    fn uniform(n: usize) -> PyResult<Self> {
        Ok(PyQudit { inner: QuditState::uniform(n).map_err(err)? })
    }

    #[staticmethod]
    fn maximally_mixed(n: usize) -> PyResult<Self> {
        Ok(PyQudit { inner: QuditState::maximally_mixed(n).map_err(err)? })
    }

    #[staticmethod]
    fn random(n: usize, seed: u64) -> PyResult<Self> {
        Ok(PyQudit { inner: QuditState::random(n, seed).map_err(err)? })
    }

    /// Pure state from unit-norm amplitudes.
    #[staticmethod]
    fn pure(amplitudes: Vec<C64>) -> PyResult<Self> {
        Ok(PyQudit { inner: QuditState::pure(&CVector::from_vec(amplitudes)).map_err(err)? })
    }

    #[staticmethod]
    fn from_density(density: Vec<Vec<C64>>) -> PyResult<Self> {
        Ok(PyQudit { inner: QuditState::from_density(&matrix(density)?).map_err(err)? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn density_matrix(&self) -> Vec<Vec<C64>> {
        rows(&self.inner.density_matrix())
    }

    fn fidelity(&self, other: &PyQudit) -> PyResult<f64> {
        self.inner.fidelity(&other.inner).map_err(err)
    }

    fn trace_distance(&self, other: &PyQudit) -> PyResult<f64> {
        self.inner.trace_distance(&other.inner).map_err(err)
    }

    /// `U rho U*`.
    fn conjugated(&self, u: Vec<Vec<C64>>) -> PyResult<Self> {
        Ok(PyQudit { inner: self.inner.conjugated(&matrix(u)?).map_err(err)? })
    }

    fn __repr__(&self) -> String {
        format!("QuditState(dim={})", self.inner.dim())
    }
}

#[pyclass(name = "BMatrix", module = "pyteleport", from_py_object)]
#[derive(Clone)]
struct PyBMatrix {
    inner: BMatrix,
}

#[pymethods]
impl PyBMatrix {
    #[staticmethod]
    fn dft(n: usize) -> PyResult<Self> {
        Ok(PyBMatrix { inner: BMatrix::dft(n).map_err(err)? })
    }

    /// Validated phase matrix from rows.
    #[new]
    fn new(entries: Vec<Vec<C64>>) -> PyResult<Self> {
        Ok(PyBMatrix { inner: BMatrix::new(matrix(entries)?).map_err(err)? })
    }

    #[staticmethod]
    fn unchecked(entries: Vec<Vec<C64>>) -> PyResult<Self> {
        Ok(PyBMatrix { inner: BMatrix::unchecked(matrix(entries)?).map_err(err)? })
    }

    fn entries(&self) -> Vec<Vec<C64>> {
        rows(self.inner.entries())
    }

    #[pyo3(signature = (tol = 1e-10))]
    fn checks<'py>(&self, py: Python<'py>, tol: f64) -> PyResult<Vec<Bound<'py, PyDict>>> {
        self.inner
            .checks(tol)
            .iter()
            .map(|c| check_dict(py, c.name, c.residual, c.tolerance, c.pass))
            .collect()
    }
}

fn check_dict<'py>(py: Python<'py>, name: &str, residual: f64, tolerance: f64, pass: bool) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("name", name)?;
    d.set_item("residual", residual)?;
    d.set_item("tolerance", tolerance)?;
    d.set_item("pass", pass)?;
    Ok(d)
}

#[pyclass(name = "Splitting", module = "pyteleport", from_py_object)]
#[derive(Clone)]
struct PySplitting {
    inner: Splitting,
}

#[pymethods]
impl PySplitting {
    #[staticmethod]
    fn half_half(n: usize) -> PyResult<Self> {
        Ok(PySplitting { inner: Splitting::half_half(n).map_err(err)? })
    }

    #[staticmethod]
    fn projection_pair(n: usize) -> PyResult<Self> {
        Ok(PySplitting { inner: Splitting::projection_pair(n).map_err(err)? })
    }

    /// The splitting conjugated by the unitaries `u` and `v`.
    fn rotated(&self, u: Vec<Vec<C64>>, v: Vec<Vec<C64>>) -> PyResult<Self> {
        Ok(PySplitting { inner: self.inner.rotated(&matrix(u)?, &matrix(v)?).map_err(err)? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn kind(&self) -> &'static str {
        match self.inner.kind() {
            SplittingKind::HalfHalf => "half-half",
            SplittingKind::ProjectionPair => "regions",
            SplittingKind::Custom => "custom",
        }
    }

    fn k1(&self) -> Vec<Vec<C64>> {
        rows(self.inner.k1())
    }

    fn k2(&self) -> Vec<Vec<C64>> {
        rows(self.inner.k2())
    }

    fn t(&self) -> Vec<Vec<C64>> {
        rows(self.inner.t())
    }

    fn validate<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let report = validate_splitting(&self.inner, self.inner.basis()).map_err(err)?;
        report.checks().iter().map(|c| check_dict(py, c.name, c.residual, c.tolerance, c.pass)).collect()
    }
}

#[derive(FromPyObject)]
enum SplittingArg {
    Name(String),
    Object(PySplitting),
}

#[pyclass(name = "TeleportModel", module = "pyteleport")]
struct PyModel {
    inner: TeleportModel,
}

fn outcome_dict<'py>(py: Python<'py>, r: &teleport::OutcomeResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("n", r.n)?;
    d.set_item("m", r.m)?;
    d.set_item("probability", r.probability)?;
    d.set_item("fidelity", r.fidelity_to_input)?;
    d.set_item("recovered", r.recovered.clone().map(|inner| PyQudit { inner }))?;
    Ok(d)
}

#[pymethods]
impl PyModel {
    /// `splitting` is `"half-half"`, `"regions"` or a `Splitting`; `b`
    /// defaults to the DFT phases.
    #[new]
    #[pyo3(signature = (n, d, splitting = SplittingArg::Name("half-half".into()), b = None))]
    fn new(n: usize, d: f64, splitting: SplittingArg, b: Option<PyBMatrix>) -> PyResult<Self> {
        let s = match splitting {
            SplittingArg::Name(name) => match name.as_str() {
                "half-half" => Splitting::half_half(n),
                "regions" => Splitting::projection_pair(n),
                other => return Err(PyValueError::new_err(format!("unknown splitting `{other}`"))),
            }
            .map_err(err)?,
            SplittingArg::Object(s) => s.inner,
        };
        let b = match b {
            Some(b) => b.inner,
            None => BMatrix::dft(n).map_err(err)?,
        };
        Ok(PyModel { inner: TeleportModel::build(n, d, s, b).map_err(err)? })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn d(&self) -> f64 {
        self.inner.d()
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn invariants<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        self.inner.invariants().iter().map(|c| check_dict(py, c.name, c.residual, c.tolerance, c.pass)).collect()
    }

    /// Bob's correction `V_nm` on the qudit.
    fn key_unitary(&self, n: usize, m: usize) -> PyResult<Vec<Vec<C64>>> {
        if n >= self.inner.n() || m >= self.inner.n() {
            return Err(PyValueError::new_err("outcome out of range"));
        }
        Ok(rows(self.inner.key_unitary(n, m)))
    }

    fn entangled_perfect(&self) -> PyFock {
        PyFock { inner: self.inner.entangled_perfect().clone() }
    }

    fn entangled_coherent(&self) -> PyFock {
        PyFock { inner: self.inner.entangled_coherent().clone() }
    }

    fn measurement_vector(&self, n: usize, m: usize) -> PyResult<PyFock> {
        if n >= self.inner.n() || m >= self.inner.n() {
            return Err(PyValueError::new_err("outcome out of range"));
        }
        Ok(PyFock { inner: self.inner.measurement_vector(n, m).clone() })
    }

    /// Every outcome with probability, recovered state and fidelity.
    #[pyo3(signature = (state, variant = "perfect"))]
    fn end_to_end<'py>(&self, py: Python<'py>, state: &PyQudit, variant: &str) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let v = self::variant(variant)?;
        let results = teleport::end_to_end(&self.inner, &state.inner, v).map_err(err)?;
        results.iter().map(|r| outcome_dict(py, r)).collect()
    }

    /// Recoverability and total-probability residuals over `states`.
    #[pyo3(signature = (states, variant = "perfect"))]
    fn verify<'py>(&self, py: Python<'py>, states: Vec<PyQudit>, variant: &str) -> PyResult<Bound<'py, PyDict>> {
        let states: Vec<QuditState> = states.into_iter().map(|s| s.inner).collect();
        let report = teleport::verify_perfectness(&self.inner, &states, self::variant(variant)?).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("variant", report.variant.name())?;
        d.set_item("max_e1", report.max_e1())?;
        d.set_item("max_e2", report.max_e2())?;
        d.set_item("total_probabilities", report.states.iter().map(|s| s.total_probability).collect::<Vec<_>>())?;
        d.set_item("entangled_transform", report.entangled_transform)?;
        Ok(d)
    }

    fn locality<'py>(&self, py: Python<'py>, states: Vec<PyQudit>) -> PyResult<Bound<'py, PyDict>> {
        let states: Vec<QuditState> = states.into_iter().map(|s| s.inner).collect();
        let report = teleport::locality_report(&self.inner, &states).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("alice_outside", report.alice_outside)?;
        d.set_item("bob_outside", report.bob_outside)?;
        d.set_item("regions_disjoint", report.regions_disjoint)?;
        Ok(d)
    }
}

/// A vector in the span of (vacuum-filtered) coherent vectors of a
/// tensor power of the Fock space.
#[pyclass(name = "FockVector", module = "pyteleport", from_py_object)]
#[derive(Clone)]
struct PyFock {
    inner: FockVector,
}

fn region(dim: usize, indices: Option<Vec<usize>>) -> PyResult<Option<Region>> {
    indices.map(|i| Region::from_indices(dim, &i)).transpose().map_err(err)
}

#[pymethods]
impl PyFock {
    #[staticmethod]
    #[pyo3(signature = (dim, modes = 1))]
    fn vacuum(dim: usize, modes: usize) -> Self {
        PyFock { inner: FockVector::vacuum(modes, dim) }
    }

    /// `|exp h>`, not normalized.
    #[staticmethod]
    fn exponential(h: Vec<C64>) -> PyResult<Self> {
        Ok(PyFock { inner: FockVector::exponential(&mode(h)?) })
    }

    /// Normalized `|exp h>`.
    #[staticmethod]
    fn coherent(h: Vec<C64>) -> PyResult<Self> {
        Ok(PyFock { inner: FockVector::coherent(&mode(h)?) })
    }

    /// Normalized `F |exp h>`, with the vacuum removed on `region`
    /// (everywhere when omitted).
    #[staticmethod]
    #[pyo3(signature = (h, region = None))]
    fn filtered_coherent(h: Vec<C64>, region: Option<Vec<usize>>) -> PyResult<Self> {
        let h = mode(h)?;
        let r = self::region(h.dim(), region)?;
        Ok(PyFock { inner: FockVector::filtered_coherent(&h, r.as_ref()) })
    }

    #[getter]
    fn modes(&self) -> usize {
        self.inner.modes()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn inner(&self, other: &PyFock) -> PyResult<C64> {
        self.inner.inner(&other.inner).map_err(err)
    }

    fn norm(&self) -> f64 {
        self.inner.norm()
    }

    fn distance(&self, other: &PyFock) -> PyResult<f64> {
        self.inner.distance(&other.inner).map_err(err)
    }

    fn tensor(&self, other: &PyFock) -> PyResult<Self> {
        Ok(PyFock { inner: self.inner.tensor(&other.inner).map_err(err)? })
    }

    fn scale(&self, c: C64) -> Self {
        PyFock { inner: self.inner.scale(c) }
    }

    fn normalize(&self) -> PyResult<Self> {
        Ok(PyFock { inner: self.inner.normalize().map_err(err)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn __add__(&self, other: &PyFock) -> PyResult<Self> {
        Ok(PyFock { inner: self.inner.add(&other.inner).map_err(err)? })
    }

    fn __sub__(&self, other: &PyFock) -> PyResult<Self> {
        Ok(PyFock { inner: self.inner.sub(&other.inner).map_err(err)? })
    }

    fn __repr__(&self) -> String {
        format!("FockVector(modes={}, dim={}, terms={})", self.inner.modes(), self.inner.dim(), self.inner.terms().len())
    }
}

#[pyfunction]
fn kernel(g: Vec<C64>, h: Vec<C64>) -> PyResult<C64> {
    fock::kernel(&mode(g)?, &mode(h)?).map_err(err)
}

#[pyfunction]
fn malliavin_d(v: &PyFock) -> PyResult<PyFock> {
    Ok(PyFock { inner: fock::malliavin_d(&v.inner).map_err(err)? })
}

#[pyfunction]
fn skorohod_s(v: &PyFock) -> PyResult<PyFock> {
    Ok(PyFock { inner: fock::skorohod_s(&v.inner).map_err(err)? })
}

/// `Gamma(t)` on every tensor factor, or on `factor` only.
#[pyfunction]
#[pyo3(signature = (t, v, factor = None))]
fn second_quantize(t: Vec<Vec<C64>>, v: &PyFock, factor: Option<usize>) -> PyResult<PyFock> {
    let sel = factor.map_or(FactorSelection::All, FactorSelection::Index);
    Ok(PyFock { inner: fock::second_quantize(&matrix(t)?, &v.inner, sel).map_err(err)? })
}

#[pyfunction]
fn split_iso(s: &PySplitting, v: &PyFock) -> PyResult<PyFock> {
    Ok(PyFock { inner: fock::split_iso(&s.inner, &v.inner).map_err(err)? })
}

#[pyfunction]
fn split_iso_adjoint(s: &PySplitting, v: &PyFock) -> PyResult<PyFock> {
    Ok(PyFock { inner: fock::split_iso_adjoint(&s.inner, &v.inner).map_err(err)? })
}

#[pyfunction]
#[pyo3(signature = (v, factor = 0, region = None))]
fn vacuum_filter(v: &PyFock, factor: usize, region: Option<Vec<usize>>) -> PyResult<PyFock> {
    let r = self::region(v.inner.dim(), region)?;
    Ok(PyFock { inner: fock::vacuum_filter(&v.inner, factor, r.as_ref()).map_err(err)? })
}

/// `gamma_squared`, `per_outcome` and `total` of the post-selected protocol.
#[pyfunction]
fn closed_forms<'py>(py: Python<'py>, n: usize, d: f64) -> PyResult<Bound<'py, PyDict>> {
    let cf = teleport::closed_forms(n, d).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("gamma_squared", cf.gamma_squared)?;
    out.set_item("per_outcome", cf.per_outcome)?;
    out.set_item("total", cf.total)?;
    Ok(out)
}

#[pymodule]
fn pyteleport(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyQudit>()?;
    m.add_class::<PyBMatrix>()?;
    m.add_class::<PySplitting>()?;
    m.add_class::<PyModel>()?;
    m.add_class::<PyFock>()?;
    m.add_function(wrap_pyfunction!(kernel, m)?)?;
    m.add_function(wrap_pyfunction!(malliavin_d, m)?)?;
    m.add_function(wrap_pyfunction!(skorohod_s, m)?)?;
    m.add_function(wrap_pyfunction!(second_quantize, m)?)?;
    m.add_function(wrap_pyfunction!(split_iso, m)?)?;
    m.add_function(wrap_pyfunction!(split_iso_adjoint, m)?)?;
    m.add_function(wrap_pyfunction!(vacuum_filter, m)?)?;
    m.add_function(wrap_pyfunction!(closed_forms, m)?)?;
    Ok(())
}
