//! Python bindings.
//!
//! Matrices cross the boundary as lists of rows. Inputs may be anything whose
//! `str()` is a rational literal (`int`, `float`, `Fraction`, `Decimal` or a
//! string such as `"3/7"`). Outputs are `Fraction` on the exact backend and
//! `float` on the floating backend.

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use psum_core::format::{format_rational, parse_rational};
use psum_core::{
    Backend, Error, Grid, ProbabilityMatrix, ProbabilityVector, Rational, Scalar, Verdict,
    WeightFunction,
};

create_exception!(psum, PsumError, PyValueError);
create_exception!(psum, UndefinedError, PsumError);

fn to_py_err(err: Error) -> PyErr {
    match err {
        Error::DegenerateSum { .. }
        | Error::NotApplicable(_)
        | Error::SignedLimit { .. }
        | Error::ZeroImage { .. } => UndefinedError::new_err(err.to_string()),
        other => PsumError::new_err(other.to_string()),
    }
}

fn parse_backend(name: &str) -> PyResult<Backend> {
    name.parse::<Backend>().map_err(PsumError::new_err)
}

fn scalar_from_py<T: Scalar>(value: &Bound<'_, PyAny>) -> PyResult<T> {
    let text = value.str()?.to_string();
    let exact = parse_rational(&text).map_err(to_py_err)?;
    Ok(T::from_rational(&exact))
}

fn scalar_to_py<'py, T: Scalar>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    match value.to_rational() {
        Some(exact) if T::BACKEND == Backend::Exact => rational_to_py(py, &exact),
        _ => Ok(value.to_f64().into_pyobject(py)?.into_any()),
    }
}

fn rational_to_py<'py>(py: Python<'py>, value: &Rational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?
        .getattr("Fraction")?
        .call1((format_rational(value),))
}

fn rows_from_py<T: Scalar>(value: &Bound<'_, PyAny>) -> PyResult<Vec<Vec<T>>> {
    let mut rows = Vec::new();
    for row in value.try_iter()? {
        let mut out = Vec::new();
        for entry in row?.try_iter()? {
            out.push(scalar_from_py(&entry?)?);
        }
        rows.push(out);
    }
    Ok(rows)
}

fn vector_from_py<T: Scalar>(value: &Bound<'_, PyAny>) -> PyResult<Vec<T>> {
    value
        .try_iter()?
        .map(|entry| scalar_from_py(&entry?))
        .collect()
}

fn vector_to_py<'py, T: Scalar>(py: Python<'py>, values: &[T]) -> PyResult<Bound<'py, PyAny>> {
    let items = values
        .iter()
        .map(|v| scalar_to_py(py, v))
        .collect::<PyResult<Vec<_>>>()?;
    Ok(PyList::new(py, items)?.into_any())
}

fn f64_vector_to_py<'py>(py: Python<'py>, values: &[f64]) -> PyResult<Bound<'py, PyAny>> {
    Ok(PyList::new(py, values)?.into_any())
}

fn grid_to_py<'py, T: Scalar>(py: Python<'py>, grid: &Grid<T>) -> PyResult<Bound<'py, PyAny>> {
    let rows = grid
        .to_rows()
        .iter()
        .map(|row| vector_to_py(py, row))
        .collect::<PyResult<Vec<_>>>()?;
    Ok(PyList::new(py, rows)?.into_any())
}

fn distribution_from_py<T: Scalar>(value: &Bound<'_, PyAny>) -> PyResult<ProbabilityMatrix<T>> {
    ProbabilityMatrix::validate(rows_from_py(value)?).map_err(to_py_err)
}

fn weights_from_py<T: Scalar>(value: &Bound<'_, PyAny>) -> PyResult<WeightFunction<T>> {
    WeightFunction::new(rows_from_py(value)?).map_err(to_py_err)
}

fn spectral_to_py<'py>(
    py: Python<'py>,
    report: &psum_core::SpectralReport,
) -> PyResult<Bound<'py, PyAny>> {
    let dict = PyDict::new(py);
    dict.set_item("eigenvalues", vector_to_py(py, &report.eigenvalues)?)?;
    let dominant = report
        .dominant_value
        .as_ref()
        .map(|v| rational_to_py(py, v))
        .transpose()?;
    dict.set_item("dominant_value", dominant)?;
    dict.set_item("dominant_index", report.dominant_index)?;
    dict.set_item("dominant_unique", report.dominant_unique)?;
    dict.set_item("diagonalizable", report.diagonalizable)?;
    let vector = report
        .dominant_eigenvector
        .as_ref()
        .map(|v| vector_to_py(py, v))
        .transpose()?;
    dict.set_item("dominant_eigenvector", vector)?;
    dict.set_item("power_method_applicable", report.power_method_applicable)?;
    Ok(dict.into_any())
}

/// The summation operator of a weight grid, held exactly.
#[pyclass(name = "SummationOperator", module = "psum", frozen)]
struct PySummationOperator {
    inner: psum_core::SummationOperator,
}

#[pymethods]
impl PySummationOperator {
    #[new]
    fn new(g: &Bound<'_, PyAny>) -> PyResult<Self> {
        let weights = weights_from_py::<Rational>(g)?;
        Ok(Self {
            inner: psum_core::build_operator(&weights),
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn source_shape(&self) -> (usize, usize) {
        self.inner.source_shape()
    }

    fn entries<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let rows = self
            .inner
            .to_rows()
            .iter()
            .map(|row| vector_to_py(py, row))
            .collect::<PyResult<Vec<_>>>()?;
        Ok(PyList::new(py, rows)?.into_any())
    }

    fn diagonal<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        vector_to_py(py, &self.inner.diagonal())
    }

    fn apply<'py>(&self, py: Python<'py>, v: &Bound<'_, PyAny>) -> PyResult<Bound<'py, PyAny>> {
        let v = vector_from_py::<Rational>(v)?;
        if v.len() != self.inner.dim() {
            let (rows, cols) = self.inner.source_shape();
            return Err(to_py_err(Error::LengthMismatch {
                rows,
                cols,
                found: v.len(),
            }));
        }
        vector_to_py(py, &self.inner.apply(&v))
    }

    fn analyze<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        spectral_to_py(py, &psum_core::analyze(&self.inner))
    }

    fn limit_distribution<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let limit = psum_core::limit_distribution(&self.inner).map_err(to_py_err)?;
        grid_to_py(py, limit.grid())
    }

    fn __repr__(&self) -> String {
        let (m, n) = self.inner.source_shape();
        format!(
            "SummationOperator(dim={}, source_shape=({m}, {n}))",
            self.inner.dim()
        )
    }
}

#[pyfunction]
fn inverse_hypergeometric<'py>(
    py: Python<'py>,
    n1: u64,
    n2: u64,
    n3: u64,
    k: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let params = psum_core::InvHypergeomParams::new(n1, n2, n3, k).map_err(to_py_err)?;
    let pm = psum_core::inverse_hypergeometric(params).map_err(to_py_err)?;
    grid_to_py(py, pm.grid())
}

#[pyfunction]
fn hypergeometric<'py>(
    py: Python<'py>,
    n1: u64,
    n2: u64,
    n3: u64,
    sample_size: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let params = psum_core::HypergeomParams::new(n1, n2, n3, sample_size).map_err(to_py_err)?;
    let pm = psum_core::hypergeometric(params).map_err(to_py_err)?;
    grid_to_py(py, pm.grid())
}

fn validate_with<'py, T: Scalar>(
    py: Python<'py>,
    dist: &Bound<'_, PyAny>,
) -> PyResult<Bound<'py, PyAny>> {
    grid_to_py(py, distribution_from_py::<T>(dist)?.grid())
}

/// Check that `dist` is a non-negative matrix summing to one and return it
/// in the backend's number type.
#[pyfunction]
#[pyo3(signature = (dist, backend = "exact"))]
fn validate<'py>(
    py: Python<'py>,
    dist: &Bound<'_, PyAny>,
    backend: &str,
) -> PyResult<Bound<'py, PyAny>> {
    match parse_backend(backend)? {
        Backend::Exact => validate_with::<Rational>(py, dist),
        Backend::Float => validate_with::<f64>(py, dist),
    }
}

fn vectorize_with<'py, T: Scalar>(
    py: Python<'py>,
    dist: &Bound<'_, PyAny>,
) -> PyResult<Bound<'py, PyAny>> {
    let pm = distribution_from_py::<T>(dist)?;
    vector_to_py(py, psum_core::vectorize(&pm).entries())
}

/// Column-major flattening of a distribution.
#[pyfunction]
#[pyo3(signature = (dist, backend = "exact"))]
fn vectorize<'py>(
    py: Python<'py>,
    dist: &Bound<'_, PyAny>,
    backend: &str,
) -> PyResult<Bound<'py, PyAny>> {
    match parse_backend(backend)? {
        Backend::Exact => vectorize_with::<Rational>(py, dist),
        Backend::Float => vectorize_with::<f64>(py, dist),
    }
}

fn devectorize_with<'py, T: Scalar>(
    py: Python<'py>,
    values: &Bound<'_, PyAny>,
    rows: usize,
    cols: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let v = ProbabilityVector::new(vector_from_py::<T>(values)?);
    let pm = psum_core::devectorize(&v, rows, cols).map_err(to_py_err)?;
    grid_to_py(py, pm.grid())
}

/// Inverse of `vectorize`.
#[pyfunction]
#[pyo3(signature = (values, rows, cols, backend = "exact"))]
fn devectorize<'py>(
    py: Python<'py>,
    values: &Bound<'_, PyAny>,
    rows: usize,
    cols: usize,
    backend: &str,
) -> PyResult<Bound<'py, PyAny>> {
    match parse_backend(backend)? {
        Backend::Exact => devectorize_with::<Rational>(py, values, rows, cols),
        Backend::Float => devectorize_with::<f64>(py, values, rows, cols),
    }
}

fn partial_sum_with<'py, T: Scalar>(
    py: Python<'py>,
    dist: &Bound<'_, PyAny>,
    g: &Bound<'_, PyAny>,
) -> PyResult<Bound<'py, PyAny>> {
    let parent = distribution_from_py::<T>(dist)?;
    let weights = weights_from_py::<T>(g)?;
    let outcome = psum_core::partial_sum_once(&parent, &weights).map_err(to_py_err)?;
    let dict = PyDict::new(py);
    dict.set_item("descendant", grid_to_py(py, &outcome.descendant)?)?;
    dict.set_item("normalizer", scalar_to_py(py, &outcome.normalizer)?)?;
    dict.set_item("raw_sum", scalar_to_py(py, &outcome.raw_sum)?)?;
    dict.set_item("signed", outcome.signed)?;
    Ok(dict.into_any())
}

/// One normalized partial summation of `dist` weighted by `g`.
///
/// Returns a dict with `descendant`, `normalizer`, `raw_sum` and `signed`.
#[pyfunction]
#[pyo3(signature = (dist, g, backend = "exact"))]
fn partial_sum_once<'py>(
    py: Python<'py>,
    dist: &Bound<'_, PyAny>,
    g: &Bound<'_, PyAny>,
    backend: &str,
) -> PyResult<Bound<'py, PyAny>> {
    match parse_backend(backend)? {
        Backend::Exact => partial_sum_with::<Rational>(py, dist, g),
        Backend::Float => partial_sum_with::<f64>(py, dist, g),
    }
}

fn iterate_with<'py, T: Scalar>(
    py: Python<'py>,
    dist: &Bound<'_, PyAny>,
    g: &Bound<'_, PyAny>,
    k: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let parent = distribution_from_py::<T>(dist)?;
    let weights = weights_from_py::<T>(g)?;
    let outcomes = psum_core::iterate(&parent, &weights, k).map_err(to_py_err)?;
    let generations = outcomes
        .iter()
        .map(|o| grid_to_py(py, &o.descendant))
        .collect::<PyResult<Vec<_>>>()?;
    Ok(PyList::new(py, generations)?.into_any())
}

/// Generations `1..=k` of repeated summation.
#[pyfunction]
#[pyo3(signature = (dist, g, k, backend = "exact"))]
fn iterate<'py>(
    py: Python<'py>,
    dist: &Bound<'_, PyAny>,
    g: &Bound<'_, PyAny>,
    k: usize,
    backend: &str,
) -> PyResult<Bound<'py, PyAny>> {
    match parse_backend(backend)? {
        Backend::Exact => iterate_with::<Rational>(py, dist, g, k),
        Backend::Float => iterate_with::<f64>(py, dist, g, k),
    }
}

fn derive_with<'py, T: Scalar>(
    py: Python<'py>,
    dist: &Bound<'_, PyAny>,
) -> PyResult<Bound<'py, PyAny>> {
    let target = distribution_from_py::<T>(dist)?;
    let weights = psum_core::derive_fixed_point_weights(&target).map_err(to_py_err)?;
    grid_to_py(py, weights.grid())
}

/// Weights for which `dist` is a fixed point of one summation.
#[pyfunction]
#[pyo3(signature = (dist, backend = "exact"))]
fn derive_fixed_point_weights<'py>(
    py: Python<'py>,
    dist: &Bound<'_, PyAny>,
    backend: &str,
) -> PyResult<Bound<'py, PyAny>> {
    match parse_backend(backend)? {
        Backend::Exact => derive_with::<Rational>(py, dist),
        Backend::Float => derive_with::<f64>(py, dist),
    }
}

#[pyfunction]
fn build_operator(g: &Bound<'_, PyAny>) -> PyResult<PySummationOperator> {
    PySummationOperator::new(g)
}

/// Spectral report of the operator built from `g`.
#[pyfunction]
fn analyze<'py>(py: Python<'py>, g: &Bound<'_, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    PySummationOperator::new(g)?.analyze(py)
}

/// The exact limit predicted by the power method.
#[pyfunction]
fn limit_distribution<'py>(py: Python<'py>, g: &Bound<'_, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    PySummationOperator::new(g)?.limit_distribution(py)
}

/// Sum-normalized floating power iteration from `start`.
#[pyfunction]
#[pyo3(signature = (g, start, tol = psum_core::analysis::DEFAULT_TOL, max_iter = psum_core::analysis::DEFAULT_MAX_ITER))]
fn power_iterate<'py>(
    py: Python<'py>,
    g: &Bound<'_, PyAny>,
    start: &Bound<'_, PyAny>,
    tol: f64,
    max_iter: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let op = psum_core::build_operator(&weights_from_py::<Rational>(g)?);
    let start = ProbabilityVector::new(vector_from_py::<Rational>(start)?);
    let trace = psum_core::power_iterate(&op, &start, tol, max_iter).map_err(to_py_err)?;
    let dict = PyDict::new(py);
    let (iterations, last) = match &trace.outcome {
        psum_core::PowerOutcome::Converged { limit, iterations } => (*iterations, limit),
        psum_core::PowerOutcome::Exhausted { last } => (max_iter, last),
    };
    dict.set_item("converged", trace.converged())?;
    dict.set_item("iterations", iterations)?;
    dict.set_item("vector", f64_vector_to_py(py, last)?)?;
    dict.set_item("orthogonal_start", trace.orthogonal_start)?;
    let vectors = trace
        .vectors
        .iter()
        .map(|v| f64_vector_to_py(py, v))
        .collect::<PyResult<Vec<_>>>()?;
    dict.set_item("vectors", PyList::new(py, vectors)?)?;
    Ok(dict.into_any())
}

fn classify_with<'py, T: Scalar>(
    py: Python<'py>,
    dist: &Bound<'_, PyAny>,
    g: &Bound<'_, PyAny>,
    tol: f64,
    max_iter: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let parent = distribution_from_py::<T>(dist)?;
    let weights = weights_from_py::<T>(g)?;
    let result = psum_core::classify(&parent, &weights, tol, max_iter).map_err(to_py_err)?;
    let dict = PyDict::new(py);
    dict.set_item("verdict", result.verdict.name())?;
    match &result.verdict {
        Verdict::Converged { limit } => dict.set_item("limit", grid_to_py(py, limit)?)?,
        Verdict::Oscillating { period, cycle } => {
            dict.set_item("period", *period)?;
            let members = cycle
                .iter()
                .map(|c| grid_to_py(py, c))
                .collect::<PyResult<Vec<_>>>()?;
            dict.set_item("cycle", PyList::new(py, members)?)?;
        }
        Verdict::Undetermined => {}
    }
    dict.set_item("iterations_used", result.iterations_used)?;
    dict.set_item("agreement", result.agreement)?;
    dict.set_item("orthogonal_start", result.orthogonal_start)?;
    dict.set_item("backend", T::BACKEND.as_str())?;
    dict.set_item("spectral", spectral_to_py(py, &result.spectral)?)?;
    Ok(dict.into_any())
}

/// Iterate until the sequence converges, revisits a generation, or runs out
/// of budget, and compare with the spectral prediction.
#[pyfunction]
#[pyo3(signature = (dist, g, tol = psum_core::analysis::DEFAULT_TOL, max_iter = psum_core::analysis::DEFAULT_MAX_ITER, backend = "exact"))]
fn classify<'py>(
    py: Python<'py>,
    dist: &Bound<'_, PyAny>,
    g: &Bound<'_, PyAny>,
    tol: f64,
    max_iter: usize,
    backend: &str,
) -> PyResult<Bound<'py, PyAny>> {
    match parse_backend(backend)? {
        Backend::Exact => classify_with::<Rational>(py, dist, g, tol, max_iter),
        Backend::Float => classify_with::<f64>(py, dist, g, tol, max_iter),
    }
}

#[pymodule]
fn psum(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("PsumError", py.get_type::<PsumError>())?;
    m.add("UndefinedError", py.get_type::<UndefinedError>())?;
    m.add_class::<PySummationOperator>()?;
    m.add_function(wrap_pyfunction!(inverse_hypergeometric, m)?)?;
    m.add_function(wrap_pyfunction!(hypergeometric, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(vectorize, m)?)?;
    m.add_function(wrap_pyfunction!(devectorize, m)?)?;
    m.add_function(wrap_pyfunction!(partial_sum_once, m)?)?;
    m.add_function(wrap_pyfunction!(iterate, m)?)?;
    m.add_function(wrap_pyfunction!(derive_fixed_point_weights, m)?)?;
    m.add_function(wrap_pyfunction!(build_operator, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(limit_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(power_iterate, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    Ok(())
}
