//! Python bindings for the `picard_mg` crate.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use picard_mg::bench::{self, ExperimentConfig, Method, ResultRow};
use picard_mg::bspline::{eval_basis, eval_spline, KnotVector};
use picard_mg::extrapolation::{
    extrapolate as extrapolate_window, solve_fixed_point, AndersonState, Extrapolation, FixedPointOutcome, FnMap,
    IterateWindow, SolveStatus, StopCriteria,
};
use picard_mg::nonlinear::{run_outer, BratuProblem, MongeAmpereProblem, OuterConfig, Problem, RunOutcome};

fn to_py(e: picard_mg::Error) -> PyErr {
    match e {
        picard_mg::Error::Config(_)
        | picard_mg::Error::InvalidKnots(_)
        | picard_mg::Error::InvalidInterval { .. }
        | picard_mg::Error::OutOfDomain { .. }
        | picard_mg::Error::DimensionMismatch { .. }
        | picard_mg::Error::DegreeTooLow { .. } => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn parse_method(s: &str) -> PyResult<Method> {
    s.parse::<Method>().map_err(to_py)
}

fn status_name(s: SolveStatus) -> &'static str {
    match s {
        SolveStatus::Converged => "converged",
        SolveStatus::MaxIterExceeded => "max_iter_exceeded",
        SolveStatus::Diverged => "diverged",
    }
}

/// Open B-spline basis on `[a, b]`.
#[pyclass(module = "pypicard")]
struct BSplineBasis {
    kv: KnotVector,
}

#[pymethods]
impl BSplineBasis {
    #[new]
    #[pyo3(signature = (degree, knots))]
    fn new(degree: usize, knots: Vec<f64>) -> PyResult<Self> {
        Ok(Self { kv: KnotVector::new(degree, knots).map_err(to_py)? })
    }

    #[staticmethod]
    #[pyo3(signature = (degree, n_elements, a=0.0, b=1.0))]
    fn uniform(degree: usize, n_elements: usize, a: f64, b: f64) -> PyResult<Self> {
        Ok(Self { kv: KnotVector::open_uniform(degree, n_elements, a, b).map_err(to_py)? })
    }

    #[getter]
    fn degree(&self) -> usize {
        self.kv.degree()
    }

    #[getter]
    fn knots(&self) -> Vec<f64> {
        self.kv.knots().to_vec()
    }

    fn __len__(&self) -> usize {
        self.kv.n_basis()
    }

    /// Returns `(first_index, values)` of the non-zero basis functions at `t`.
    #[pyo3(signature = (t, deriv=0))]
    fn evaluate(&self, t: f64, deriv: usize) -> PyResult<(usize, Vec<f64>)> {
        let ev = eval_basis(&self.kv, t, deriv).map_err(to_py)?;
        Ok((ev.first_index(), ev.derivative(deriv).to_vec()))
    }

    #[pyo3(signature = (coefficients, t, deriv=0))]
    fn spline(&self, coefficients: Vec<f64>, t: f64, deriv: usize) -> PyResult<f64> {
        eval_spline(&self.kv, &coefficients, t, deriv).map_err(to_py)
    }

    fn greville(&self) -> Vec<f64> {
        self.kv.greville()
    }

    fn __repr__(&self) -> String {
        format!("BSplineBasis(degree={}, n_basis={})", self.kv.degree(), self.kv.n_basis())
    }
}

/// Anderson mixing state.
#[pyclass(module = "pypicard")]
struct AndersonMixer {
    state: AndersonState,
}

#[pymethods]
impl AndersonMixer {
    #[new]
    fn new(depth: usize) -> Self {
        Self { state: AndersonState::new(depth) }
    }

    fn step(&mut self, s: Vec<f64>, g: Vec<f64>) -> PyResult<Vec<f64>> {
        if s.len() != g.len() {
            return Err(PyValueError::new_err("s and g must have equal length"));
        }
        Ok(self.state.step(&s, &g))
    }

    #[getter]
    fn theta(&self) -> Vec<f64> {
        self.state.theta().to_vec()
    }

    #[getter]
    fn beta(&self) -> Vec<f64> {
        self.state.beta()
    }
}

/// MPE or RRE extrapolation of a window `[s_k, ..., s_{k+q+1}]`.
#[pyfunction]
#[pyo3(signature = (iterates, method="rre"))]
fn extrapolate<'py>(py: Python<'py>, iterates: Vec<Vec<f64>>, method: &str) -> PyResult<Bound<'py, PyDict>> {
    let m = match method.to_ascii_lowercase().as_str() {
        "rre" => Extrapolation::Rre,
        "mpe" => Extrapolation::Mpe,
        other => return Err(PyValueError::new_err(format!("unknown method '{other}'"))),
    };
    let w = IterateWindow::new(&iterates).map_err(to_py)?;
    let r = extrapolate_window(&w, m).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("t", r.t)?;
    d.set_item("gamma", r.gamma)?;
    d.set_item("residual_norm", r.generalized_residual_norm)?;
    Ok(d)
}

fn outcome_dict<'py>(py: Python<'py>, out: FixedPointOutcome) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("status", status_name(out.status))?;
    d.set_item("iterations", out.iterations())?;
    d.set_item("residuals", out.history.residuals())?;
    d.set_item("x", out.x)?;
    Ok(d)
}

/// Accelerated fixed-point iteration of a Python callable `x -> G(x)`.
#[pyfunction]
#[pyo3(signature = (func, x0, method="picard", tol=1e-10, maxiter=1000))]
fn fixed_point<'py>(
    py: Python<'py>,
    func: Bound<'py, PyAny>,
    x0: Vec<f64>,
    method: &str,
    tol: f64,
    maxiter: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let acc = parse_method(method)?.accelerator();
    let mut failure: Option<PyErr> = None;
    let result = {
        let mut map = FnMap(|x: &[f64]| {
            let y = func.call1((x.to_vec(),)).and_then(|v| v.extract::<Vec<f64>>());
            match y {
                Ok(y) if y.len() == x.len() => Ok(y),
                Ok(y) => Err(picard_mg::Error::DimensionMismatch { expected: x.len(), found: y.len() }),
                Err(e) => {
                    failure = Some(e);
                    Err(picard_mg::Error::Config("callback raised an exception".into()))
                }
            }
        });
        solve_fixed_point(&mut map, &x0, acc, StopCriteria::new(tol, maxiter))
    };
    if let Some(e) = failure {
        return Err(e);
    }
    outcome_dict(py, result.map_err(to_py)?)
}

fn run_dict<'py>(py: Python<'py>, out: RunOutcome) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("status", status_name(out.status))?;
    d.set_item("iterations", out.iterations())?;
    d.set_item("relative_residual", out.relative_residual())?;
    d.set_item("l2_error", out.l2_error())?;
    d.set_item("residuals", out.history.residuals())?;
    d.set_item("coefficients", out.field.coefficients)?;
    Ok(d)
}

/// Manufactured Bratu problem on the unit interval (`dims=1`) or square (`dims=2`).
#[pyfunction]
#[pyo3(signature = (lam, degree, n_elements, dims=1, method="mpe(5)", tol=1e-10, maxiter=1000, wavenumber=1))]
#[allow(clippy::too_many_arguments)]
fn solve_bratu<'py>(
    py: Python<'py>,
    lam: f64,
    degree: usize,
    n_elements: usize,
    dims: usize,
    method: &str,
    tol: f64,
    maxiter: usize,
    wavenumber: u32,
) -> PyResult<Bound<'py, PyDict>> {
    let m = parse_method(method)?;
    let prob = match dims {
        1 => BratuProblem::manufactured_1d(lam, degree, n_elements, wavenumber),
        2 => BratuProblem::manufactured_2d(lam, degree, n_elements),
        _ => return Err(PyValueError::new_err("dims must be 1 or 2")),
    }
    .map_err(to_py)?;
    let mut cfg = OuterConfig::bratu(m.accelerator(), tol, maxiter);
    if m == Method::PicardSlu {
        cfg.inner = picard_mg::nonlinear::InnerSolver::Direct;
    }
    let out = py.detach(|| run_outer(&Problem::Bratu(prob), &cfg)).map_err(to_py)?;
    run_dict(py, out)
}

/// Manufactured Monge–Ampère problem on the unit square.
#[pyfunction]
#[pyo3(signature = (degree, n_elements, method="mpe(5)", tol=1e-10, maxiter=1000, linear_tol=1e-6))]
fn solve_monge_ampere<'py>(
    py: Python<'py>,
    degree: usize,
    n_elements: usize,
    method: &str,
    tol: f64,
    maxiter: usize,
    linear_tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let m = parse_method(method)?;
    let prob = MongeAmpereProblem::manufactured(degree, n_elements).map_err(to_py)?;
    let cfg = OuterConfig::monge_ampere(m.accelerator(), tol, maxiter, linear_tol);
    let out = py.detach(|| run_outer(&Problem::MongeAmpere(prob), &cfg)).map_err(to_py)?;
    run_dict(py, out)
}

fn rows_to_py<'py>(py: Python<'py>, rows: &[ResultRow]) -> PyResult<Vec<Bound<'py, PyDict>>> {
    rows.iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("problem", r.problem.to_string())?;
            d.set_item("method", r.method.to_string())?;
            d.set_item("label", r.method.label())?;
            d.set_item("lambda", r.lambda)?;
            d.set_item("p", r.p)?;
            d.set_item("h", r.h)?;
            d.set_item("iter", r.iter)?;
            d.set_item("relative_residual", r.relative_residual)?;
            d.set_item("l2_err", r.l2_err)?;
            d.set_item("cpu_s", r.cpu_s)?;
            d.set_item("converged", r.converged)?;
            Ok(d)
        })
        .collect()
}

/// Runs an experiment config given as text and returns one dict per cell.
#[pyfunction]
#[pyo3(signature = (text, threads=None))]
fn run_config<'py>(py: Python<'py>, text: &str, threads: Option<usize>) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let cfg = ExperimentConfig::parse(text).map_err(to_py)?;
    let rows: Vec<ResultRow> = py
        .detach(|| bench::run_cells(&cfg, threads))
        .map_err(to_py)?
        .into_iter()
        .map(|c| c.row)
        .collect();
    rows_to_py(py, &rows)
}

/// Runs one of the bundled table configs (1-5).
#[pyfunction]
#[pyo3(signature = (number, threads=None))]
fn run_table<'py>(py: Python<'py>, number: u8, threads: Option<usize>) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let text = bench::table_config_text(number).ok_or_else(|| PyValueError::new_err("table must be 1-5"))?;
    run_config(py, text, threads)
}

/// Text of a bundled table config.
#[pyfunction]
fn table_config(number: u8) -> PyResult<&'static str> {
    bench::table_config_text(number).ok_or_else(|| PyValueError::new_err("table must be 1-5"))
}

#[pymodule]
fn pypicard(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<BSplineBasis>()?;
    m.add_class::<AndersonMixer>()?;
    m.add_function(wrap_pyfunction!(extrapolate, m)?)?;
    m.add_function(wrap_pyfunction!(fixed_point, m)?)?;
    m.add_function(wrap_pyfunction!(solve_bratu, m)?)?;
    m.add_function(wrap_pyfunction!(solve_monge_ampere, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    m.add_function(wrap_pyfunction!(run_table, m)?)?;
    m.add_function(wrap_pyfunction!(table_config, m)?)?;
    Ok(())
}
