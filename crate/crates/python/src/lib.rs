//! Python bindings: parsing, evaluation by every route, partial fractions,
//! the family closed forms and the verification suite.

use pyo3::create_exception;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

use ::seriesum as core;
use core::oracle;
use core::partial_fractions::decompose;
use core::series_engine::{self, EvalResult, Method, SeriesSpec};
use core::spec_parser;
use core::Rational;

create_exception!(seriesum, ParseError, PyValueError, "Malformed or divergent series input.");
create_exception!(seriesum, EvaluationError, PyArithmeticError, "A series could not be evaluated.");

fn parse_error(e: spec_parser::ParseError) -> PyErr {
    ParseError::new_err((e.to_string(), e.byte_offset, e.kind.to_string()))
}

fn eval_error(e: impl std::fmt::Display) -> PyErr {
    EvaluationError::new_err(e.to_string())
}

fn rational(text: &str) -> PyResult<Rational> {
    text.parse()
        .map_err(|e| PyValueError::new_err(format!("invalid rational `{text}`: {e}")))
}

/// Result of an evaluation. `exact` is a `"p/q"` string when known.
#[pyclass(name = "EvalResult", frozen, get_all, skip_from_py_object)]
struct PyEvalResult {
    exact: Option<String>,
    numeric: f64,
    error_bound: f64,
    method: String,
}

#[pymethods]
impl PyEvalResult {
    fn __repr__(&self) -> String {
        match &self.exact {
            Some(e) => format!("EvalResult(exact={e}, numeric={}, method={})", self.numeric, self.method),
            None => format!(
                "EvalResult(numeric={}, error_bound={:e}, method={})",
                self.numeric, self.error_bound, self.method
            ),
        }
    }
}

impl From<EvalResult> for PyEvalResult {
    fn from(r: EvalResult) -> Self {
        PyEvalResult {
            exact: r.exact.map(|e| e.to_ratio_string()),
            numeric: r.numeric,
            error_bound: r.error_bound,
            method: r.method.to_string(),
        }
    }
}

/// A parsed series `Σ_{k >= start} Q(k)/P(k)`.
#[pyclass(name = "Series", frozen)]
struct PySeries {
    spec: SeriesSpec,
}

#[pymethods]
impl PySeries {
    #[new]
    #[pyo3(signature = (dsl, start = 1))]
    fn new(dsl: &str, start: u64) -> PyResult<Self> {
        spec_parser::parse_with_start(dsl, start)
            .map(|spec| PySeries { spec })
            .map_err(parse_error)
    }

    #[getter]
    fn start(&self) -> u64 {
        match &self.spec {
            SeriesSpec::GeneralRational { start, .. } => *start,
            _ => 1,
        }
    }

    /// Evaluate by `method`: auto, closed, polygamma, integral or oracle.
    #[pyo3(signature = (method = "auto", tol = 1e-12))]
    fn evaluate(&self, method: &str, tol: f64) -> PyResult<PyEvalResult> {
        let method: Method = method.parse().map_err(PyValueError::new_err)?;
        series_engine::evaluate(&self.spec, method, tol)
            .map(Into::into)
            .map_err(eval_error)
    }

    /// Partial-fraction table as `(shift, order, coeff)` triples of `"p/q"`
    /// strings, ordered by shift then order, with the leading coefficient.
    fn decompose(&self) -> (String, Vec<(String, u32, String)>) {
        let d = decompose(self.term());
        let terms = d
            .terms
            .iter()
            .map(|t| (t.shift.to_ratio_string(), t.order, t.coeff.to_ratio_string()))
            .collect();
        (d.leading.to_ratio_string(), terms)
    }

    /// Exact `Σ_{k=start}^{cutoff}` as `"p/q"`.
    fn partial_sum(&self, cutoff: u64) -> PyResult<String> {
        oracle::partial_sum(self.term(), self.start(), cutoff)
            .map(|s| s.to_ratio_string())
            .map_err(eval_error)
    }

    /// Rigorous bound on the tail past `cutoff`, as `"p/q"`.
    fn tail_bound(&self, cutoff: u64) -> PyResult<String> {
        oracle::tail_bound(self.term(), cutoff)
            .map(|t| t.bound.to_ratio_string())
            .map_err(eval_error)
    }

    fn __str__(&self) -> String {
        self.term().to_string()
    }

    fn __repr__(&self) -> String {
        format!("Series('{}', start={})", self.term(), self.start())
    }
}

impl PySeries {
    fn term(&self) -> &core::FactoredRational {
        match &self.spec {
            SeriesSpec::GeneralRational { term, .. } => term,
            _ => unreachable!("constructed from the DSL"),
        }
    }
}

/// `Σ 1/(k(k+1)···(k+n)) = 1/(n·n!)`, as `"p/q"`.
#[pyfunction]
fn andreoli(n: u32) -> PyResult<String> {
    evaluate_exact(SeriesSpec::AndreoliFamily { n })
}

/// `Σ_k ∏_{i=0}^{n} 1/(a + (k+i)b)`, as `"p/q"`; `a`, `b` are rational strings.
#[pyfunction]
fn arithmetic(a: &str, b: &str, n: u32) -> PyResult<String> {
    evaluate_exact(SeriesSpec::ArithmeticFamily {
        a: rational(a)?,
        b: rational(b)?,
        n,
    })
}

/// `Σ_k ∏_{i=0}^{n} 1/(k + iℓ)`, as `"p/q"`.
#[pyfunction]
fn step(l: u32, n: u32) -> PyResult<String> {
    evaluate_exact(SeriesSpec::StepFamily { step: l, n })
}

/// `F(x; ℓ) = Σ_n ∏_{i=0}^{n} 1/(x + iℓ)`.
#[pyfunction]
#[pyo3(signature = (x, l, tol = 1e-12))]
fn over_n(x: f64, l: u32, tol: f64) -> PyResult<PyEvalResult> {
    series_engine::evaluate(&SeriesSpec::OverNFamily { x, step: l }, Method::Auto, tol)
        .map(Into::into)
        .map_err(eval_error)
}

fn evaluate_exact(spec: SeriesSpec) -> PyResult<String> {
    let r = series_engine::evaluate(&spec, Method::Closed, 1e-12).map_err(eval_error)?;
    Ok(r.exact.expect("closed forms are exact").to_ratio_string())
}

/// Runs the reproduction battery; returns `(name, expected, got, tolerance, pass)` tuples.
#[pyfunction]
fn verify_paper(py: Python<'_>) -> Vec<(String, String, String, f64, bool)> {
    py.detach(core::verify::paper_suite)
        .into_iter()
        .map(|i| (i.name, i.expected, i.got, i.tolerance, i.pass))
        .collect()
}

#[pymodule]
pub fn seriesum(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySeries>()?;
    m.add_class::<PyEvalResult>()?;
    m.add_function(wrap_pyfunction!(andreoli, m)?)?;
    m.add_function(wrap_pyfunction!(arithmetic, m)?)?;
    m.add_function(wrap_pyfunction!(step, m)?)?;
    m.add_function(wrap_pyfunction!(over_n, m)?)?;
    m.add_function(wrap_pyfunction!(verify_paper, m)?)?;
    m.add("ParseError", m.py().get_type::<ParseError>())?;
    m.add("EvaluationError", m.py().get_type::<EvaluationError>())?;
    Ok(())
}
