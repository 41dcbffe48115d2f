//! Python bindings: p-adic numbers, local fields, root counting, the
//! parameter search and the JSON job runner.

use num_bigint::BigInt;
use num_rational::BigRational;
use pyo3::exceptions::{PyArithmeticError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use panayi_core::catalog::{Catalog, GenericPolynomial};
use panayi_core::cli;
use panayi_core::field::LocalField;
use panayi_core::padic::{PadicNumber, Valuation};
use panayi_core::panayi;
use panayi_core::poly::PolyOverK;
use panayi_core::search::{self as core_search, SearchJob};
use panayi_core::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::PrecisionExhausted(_) | Error::DivisionByZero => {
            PyArithmeticError::new_err(e.to_string())
        }
        Error::InvalidInput(_)
        | Error::InvalidPrime(_)
        | Error::NoRootInField
        | Error::DegenerateSpecialization
        | Error::EmbeddingFailed(_)
        | Error::NotIntegral(_)
        | Error::ZeroDivisorDetected(_)
        | Error::UniformizerNotFound(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// An `int` or a decimal string such as `"-5/3"`.
fn rational(v: &Bound<'_, PyAny>) -> PyResult<BigRational> {
    if let Ok(n) = v.extract::<BigInt>() {
        return Ok(BigRational::from_integer(n));
    }
    let s: String = v.extract()?;
    s.trim()
        .parse()
        .map_err(|_| PyValueError::new_err(format!("not a rational number: {s:?}")))
}

fn rationals(vs: &[Bound<'_, PyAny>]) -> PyResult<Vec<BigRational>> {
    vs.iter().map(rational).collect()
}

fn valuation_tuple(v: Valuation) -> (i64, bool) {
    match v {
        Valuation::Exact(k) => (k, true),
        Valuation::AtLeast(k) => (k, false),
    }
}

/// Capped-relative `p`-adic number.
#[pyclass(name = "Padic", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPadic {
    inner: PadicNumber,
}

#[pymethods]
impl PyPadic {
    #[new]
    #[pyo3(signature = (value, p, precision = 20))]
    fn new(value: &Bound<'_, PyAny>, p: u64, precision: i64) -> PyResult<Self> {
        let q = rational(value)?;
        let inner = PadicNumber::from_big_rational(&q, p, precision).map_err(to_py)?;
        Ok(PyPadic { inner })
    }

    #[getter]
    fn p(&self) -> u64 {
        self.inner.p()
    }

    /// `(v, exact)`; for a zero to precision `v` is the precision bound.
    fn valuation(&self) -> (i64, bool) {
        valuation_tuple(self.inner.valuation())
    }

    fn abs_precision(&self) -> i64 {
        self.inner.abs_precision()
    }

    fn is_zero(&self) -> bool {
        self.inner.is_zero()
    }

    /// Representative with the unit in the symmetric range, as `"a/b"`.
    fn to_rational(&self) -> String {
        self.inner.to_rational().to_string()
    }

    fn inverse(&self) -> PyResult<Self> {
        Ok(PyPadic {
            inner: self.inner.inv().map_err(to_py)?,
        })
    }

    fn __add__(&self, other: &Self) -> Self {
        PyPadic {
            inner: self.inner.add_ref(&other.inner),
        }
    }

    fn __sub__(&self, other: &Self) -> Self {
        PyPadic {
            inner: self.inner.sub_ref(&other.inner),
        }
    }

    fn __mul__(&self, other: &Self) -> Self {
        PyPadic {
            inner: self.inner.mul_ref(&other.inner),
        }
    }

    fn __truediv__(&self, other: &Self) -> PyResult<Self> {
        Ok(PyPadic {
            inner: self.inner.div(&other.inner).map_err(to_py)?,
        })
    }

    fn __neg__(&self) -> Self {
        PyPadic {
            inner: self.inner.neg_ref(),
        }
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner.eq_to_precision(&other.inner)
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Padic({})", self.inner)
    }
}

/// `K = Q_p[x]/(g)` for a monic irreducible integer `g`.
#[pyclass(name = "LocalField", frozen)]
struct PyLocalField {
    inner: LocalField,
}

impl PyLocalField {
    fn poly(&self, coeffs: &[Bound<'_, PyAny>]) -> PyResult<PolyOverK> {
        PolyOverK::from_rationals(&self.inner, &rationals(coeffs)?).map_err(to_py)
    }
}

#[pymethods]
impl PyLocalField {
    #[new]
    #[pyo3(signature = (p, defining, precision = 60))]
    fn new(p: u64, defining: Vec<BigInt>, precision: i64) -> PyResult<Self> {
        Ok(PyLocalField {
            inner: LocalField::new(p, &defining, precision).map_err(to_py)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (p, precision = 60))]
    fn rationals(p: u64, precision: i64) -> PyResult<Self> {
        Ok(PyLocalField {
            inner: LocalField::rationals(p, precision).map_err(to_py)?,
        })
    }

    #[getter]
    fn p(&self) -> u64 {
        self.inner.p()
    }

    #[getter]
    fn degree(&self) -> usize {
        self.inner.degree()
    }

    #[getter]
    fn ramification_index(&self) -> usize {
        self.inner.ramification_index()
    }

    #[getter]
    fn residue_degree(&self) -> usize {
        self.inner.residue_degree()
    }

    #[getter]
    fn precision(&self) -> i64 {
        self.inner.precision()
    }

    #[getter]
    fn defining(&self) -> Vec<BigInt> {
        self.inner.defining_polynomial().to_vec()
    }

    /// Root count of a squarefree polynomial (coefficients constant term
    /// first), with digit expansions of the roots.
    #[pyo3(signature = (coeffs, max_depth = None))]
    fn count_roots<'py>(
        &self,
        py: Python<'py>,
        coeffs: Vec<Bound<'py, PyAny>>,
        max_depth: Option<usize>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let phi = self.poly(&coeffs)?;
        let report = py
            .detach(|| panayi::count_roots(&phi, &self.inner, max_depth))
            .map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("count", report.count)?;
        d.set_item("discriminant_valuation", report.discriminant_valuation)?;
        let roots = report
            .roots
            .iter()
            .map(|r| {
                let e = PyDict::new(py);
                e.set_item(
                    "digits",
                    r.digits.iter().map(ToString::to_string).collect::<Vec<_>>(),
                )?;
                e.set_item("residual_valuation", valuation_tuple(r.residual_valuation))?;
                e.set_item("reciprocal", r.reciprocal)?;
                Ok(e)
            })
            .collect::<PyResult<Vec<_>>>()?;
        d.set_item("roots", roots)?;
        Ok(d)
    }

    fn has_root(&self, py: Python<'_>, coeffs: Vec<Bound<'_, PyAny>>) -> PyResult<bool> {
        let phi = self.poly(&coeffs)?;
        let report = py
            .detach(|| panayi::count_roots(&phi, &self.inner, None))
            .map_err(to_py)?;
        Ok(report.count > 0)
    }

    fn __repr__(&self) -> String {
        format!(
            "LocalField(p={}, defining={:?}, e={}, f={})",
            self.inner.p(),
            self.inner
                .defining_polynomial()
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>(),
            self.inner.ramification_index(),
            self.inner.residue_degree()
        )
    }
}

/// A generic polynomial `P(params, x)`.
#[pyclass(name = "Generic", frozen)]
struct PyGeneric {
    inner: GenericPolynomial,
}

#[pymethods]
impl PyGeneric {
    /// A built-in catalog entry (`"D5"`, `"C3"`).
    #[staticmethod]
    fn builtin(name: &str) -> PyResult<Self> {
        Ok(PyGeneric {
            inner: Catalog::default().get(name).map_err(to_py)?.clone(),
        })
    }

    /// From `{"name", "group", "arity", "template"}` as a JSON string.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let v: serde_json::Value =
            serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(PyGeneric {
            inner: GenericPolynomial::from_json(&v).map_err(to_py)?,
        })
    }

    #[getter]
    fn name(&self) -> &str {
        &self.inner.name
    }

    #[getter]
    fn group(&self) -> &str {
        &self.inner.group
    }

    #[getter]
    fn arity(&self) -> usize {
        self.inner.arity
    }

    #[getter]
    fn degree(&self) -> usize {
        self.inner.degree()
    }

    /// `P(params, x)` over `Q`, coefficients as decimal strings.
    fn specialize(&self, params: Vec<Bound<'_, PyAny>>) -> PyResult<Vec<String>> {
        let q = self
            .inner
            .specialize_rational(&rationals(&params)?)
            .map_err(to_py)?;
        Ok(q.iter().map(ToString::to_string).collect())
    }
}

/// Parameter search with one free parameter. Returns one dict per branch.
#[pyfunction]
#[pyo3(signature = (field, generic, fixed_params, digit_bound, subfield = None, free_param = None, frontier_cap = None, iteration_cap = None))]
#[allow(clippy::too_many_arguments)]
fn search<'py>(
    py: Python<'py>,
    field: &PyLocalField,
    generic: &PyGeneric,
    fixed_params: Vec<Bound<'py, PyAny>>,
    digit_bound: usize,
    subfield: Option<Vec<BigInt>>,
    free_param: Option<usize>,
    frontier_cap: Option<usize>,
    iteration_cap: Option<usize>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let fixed = rationals(&fixed_params)?
        .into_iter()
        .map(|q| vec![q])
        .collect();
    let mut job = SearchJob::new(generic.inner.clone(), fixed, digit_bound);
    job.free_param = free_param;
    if let Some(s) = subfield {
        job.subfield = s;
    }
    if let Some(cap) = frontier_cap {
        job.frontier_cap = cap;
    }
    job.iteration_cap = iteration_cap;
    let result = py
        .detach(|| core_search::search(&field.inner, &job))
        .map_err(to_py)?;
    result
        .branches
        .iter()
        .map(|b| {
            let d = PyDict::new(py);
            d.set_item("status", b.status.label())?;
            d.set_item(
                "digits",
                b.digits.iter().map(ToString::to_string).collect::<Vec<_>>(),
            )?;
            d.set_item(
                "x_digits",
                b.x_digits
                    .iter()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>(),
            )?;
            d.set_item("reconstruction", b.reconstruction.clone())?;
            d.set_item(
                "specialized",
                b.specialized_rational
                    .as_ref()
                    .map(|q| q.iter().map(ToString::to_string).collect::<Vec<_>>()),
            )?;
            d.set_item("defines_field", b.defines_field)?;
            Ok(d)
        })
        .collect()
}

/// Whether `candidate` has a root in `Q_p[x]/(local)`.
#[pyfunction]
#[pyo3(signature = (p, local, candidate, precision = 200))]
fn check_gsm_local(
    py: Python<'_>,
    p: u64,
    local: Vec<BigInt>,
    candidate: Vec<BigInt>,
    precision: i64,
) -> PyResult<bool> {
    py.detach(|| core_search::check_gsm_local(p, &local, &candidate, precision))
        .map_err(to_py)
}

/// Runs a JSON job as the command-line tool would: returns the result body
/// and the exit code. Errors surface as exceptions.
#[pyfunction]
#[pyo3(signature = (command, job, precision = None))]
fn run_job(
    py: Python<'_>,
    command: &str,
    job: &str,
    precision: Option<i64>,
) -> PyResult<(String, i32)> {
    let command = match command {
        "roots" => cli::Command::Roots,
        "search" => cli::Command::Search,
        "check" => cli::Command::Check,
        other => return Err(PyValueError::new_err(format!("unknown command {other:?}"))),
    };
    let job = cli::JobFile::parse(job).map_err(to_py)?;
    let out = py
        .detach(|| cli::run_job(&job, command, precision, &Catalog::default()))
        .map_err(to_py)?;
    Ok((cli::render(&out.document), out.exit_code))
}

#[pymodule]
fn gsm_panayi(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPadic>()?;
    m.add_class::<PyLocalField>()?;
    m.add_class::<PyGeneric>()?;
    m.add_function(wrap_pyfunction!(search, m)?)?;
    m.add_function(wrap_pyfunction!(check_gsm_local, m)?)?;
    m.add_function(wrap_pyfunction!(run_job, m)?)?;
    Ok(())
}
