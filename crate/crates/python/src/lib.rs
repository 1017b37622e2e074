//! Python bindings for the Johnson-graph search simulator.
//!
//! Structured results (tables, run reports, certificates) cross the boundary
//! as the same JSON documents the CLI emits, decoded into plain dicts.

use johnson_search::commands::{self, SimulateOptions};
use johnson_search::reduced::{self, ReducedState, TargetCoords};
use johnson_search::spectral::{run_time as schedule, SpectralTable};
use johnson_search::{ArcWalk, Engine, GraphParams, JohnsonGraph, ReducedOperator, SearchConfig, WalkError};
use num_complex::Complex64;
use pyo3::exceptions::{PyMemoryError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyAny;

fn to_py(err: WalkError) -> PyErr {
    match commands::exit_code(&err) {
        2 => PyValueError::new_err(err.to_string()),
        3 => PyMemoryError::new_err(err.to_string()),
        _ => PyRuntimeError::new_err(err.to_string()),
    }
}

fn json<'py>(py: Python<'py>, text: String) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

fn params(n: usize, k: usize) -> PyResult<GraphParams> {
    GraphParams::new(n, k).map_err(to_py)
}

/// Vertex set of J(n, k) in colex order. Subsets are 1-based lists.
#[pyclass(name = "JohnsonGraph", frozen)]
struct PyJohnsonGraph {
    inner: JohnsonGraph,
}

#[pymethods]
impl PyJohnsonGraph {
    #[new]
    fn new(n: usize, k: usize) -> PyResult<Self> {
        Ok(Self {
            inner: JohnsonGraph::from_nk(n, k).map_err(to_py)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.params().n
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.params().k
    }

    #[getter]
    fn degree(&self) -> usize {
        self.inner.params().degree
    }

    fn __len__(&self) -> usize {
        self.inner.vertex_count()
    }

    fn rank(&self, subset: Vec<usize>) -> PyResult<usize> {
        if subset.contains(&0) {
            return Err(PyValueError::new_err("elements are 1-based"));
        }
        let zero: Vec<usize> = subset.iter().map(|x| x - 1).collect();
        self.inner.rank(&zero).map_err(to_py)
    }

    fn unrank(&self, rank: usize) -> PyResult<Vec<usize>> {
        let v = self.inner.unrank(rank).map_err(to_py)?;
        Ok(v.into_iter().map(|x| x + 1).collect())
    }

    fn distance(&self, v: usize, w: usize) -> PyResult<usize> {
        self.inner.distance_class(v, w).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        let p = self.inner.params();
        format!("JohnsonGraph(n={}, k={})", p.n, p.k)
    }
}

/// Search restricted to the invariant subspace, dimension `2k + 1`.
#[pyclass(name = "ReducedSearch", frozen)]
struct PyReducedSearch {
    op: ReducedOperator,
    target: TargetCoords,
    init: ReducedState,
}

#[pymethods]
impl PyReducedSearch {
    #[new]
    fn new(n: usize, k: usize) -> PyResult<Self> {
        let (op, target, init) = reduced::build_reduced(&params(n, k)?).map_err(to_py)?;
        Ok(Self { op, target, init })
    }

    #[getter]
    fn t_run(&self) -> u64 {
        schedule(self.op.params()).t_run
    }

    #[getter]
    fn dim(&self) -> usize {
        self.op.dim()
    }

    /// `p_succ(t)` for `t = 0..=steps`.
    fn success_series(&self, py: Python<'_>, steps: u64) -> Vec<f64> {
        py.detach(|| reduced::success_series(&self.op, steps))
    }

    fn success_at(&self, py: Python<'_>, t: u64) -> f64 {
        py.detach(|| reduced::success_probability(&self.target, &reduced::evolve(&self.op, &self.init, t)))
    }

    /// Eigenphases in `(-pi, pi]`, ascending.
    fn eigenphases(&self) -> PyResult<Vec<f64>> {
        reduced::eigenphases(&self.op).map_err(to_py)
    }

    /// `(t, p)` maximising `p_succ` over `[0, t_max]`.
    fn find_peak(&self, py: Python<'_>, t_max: u64) -> (u64, f64) {
        py.detach(|| reduced::find_peak(&self.op, &self.target, t_max))
    }

    fn step_matrix(&self) -> Vec<Vec<Complex64>> {
        let m = self.op.step_matrix();
        m.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    fn unitarity_error(&self) -> f64 {
        self.op.unitarity_error()
    }
}

/// Search on the full arc space, `N d` amplitudes.
#[pyclass(name = "ArcSearch")]
struct PyArcSearch {
    walk: ArcWalk,
    marked: usize,
}

#[pymethods]
impl PyArcSearch {
    #[new]
    #[pyo3(signature = (n, k, marked=None))]
    fn new(n: usize, k: usize, marked: Option<Vec<usize>>) -> PyResult<Self> {
        let walk = ArcWalk::new(params(n, k)?).map_err(to_py)?;
        let marked = match marked {
            Some(subset) if subset.contains(&0) => return Err(PyValueError::new_err("elements are 1-based")),
            Some(subset) => {
                let zero: Vec<usize> = subset.iter().map(|x| x - 1).collect();
                walk.graph().rank(&zero).map_err(to_py)?
            }
            None => 0,
        };
        Ok(Self { walk, marked })
    }

    #[getter]
    fn arc_count(&self) -> usize {
        self.walk.graph().arc_count()
    }

    /// Runs `steps` search steps and returns the run report as a dict.
    #[pyo3(signature = (steps, stride=1))]
    fn evolve<'py>(&mut self, py: Python<'py>, steps: u64, stride: u64) -> PyResult<Bound<'py, PyAny>> {
        let config = SearchConfig {
            params: *self.walk.params(),
            marked: self.marked,
            steps,
            stride,
        };
        let walk = &mut self.walk;
        let report = py.detach(|| walk.evolve_and_record(&config)).map_err(to_py)?;
        json(py, report.to_json().map_err(to_py)?)
    }
}

/// Spectral table and schedule as a dict.
#[pyfunction]
fn spectrum<'py>(py: Python<'py>, n: usize, k: usize) -> PyResult<Bound<'py, PyAny>> {
    json(py, commands::cmd_spectrum(n, k, commands::Format::Json).map_err(to_py)?)
}

/// `(t_run, epsilon, target_phase)`.
#[pyfunction]
fn run_time(n: usize, k: usize) -> PyResult<(u64, f64, f64)> {
    let s = schedule(&params(n, k)?);
    Ok((s.t_run, s.epsilon, s.target_phase))
}

/// Eigenvalues `lambda_l` of the adjacency matrix, `l = 0..=k`.
#[pyfunction]
fn eigenvalues(n: usize, k: usize) -> PyResult<Vec<i64>> {
    let table = SpectralTable::new(&params(n, k)?).map_err(to_py)?;
    Ok(table.rows.iter().map(|r| r.lambda).collect())
}

#[pyfunction]
#[pyo3(signature = (n, k, engine="reduced", steps=None, stride=1, marked=None))]
fn simulate<'py>(
    py: Python<'py>,
    n: usize,
    k: usize,
    engine: &str,
    steps: Option<u64>,
    stride: u64,
    marked: Option<String>,
) -> PyResult<Bound<'py, PyAny>> {
    let engine = match engine {
        "full" => Engine::Full,
        "reduced" => Engine::Reduced,
        other => return Err(PyValueError::new_err(format!("unknown engine {other:?}"))),
    };
    let opts = SimulateOptions {
        n,
        k,
        engine,
        steps,
        marked,
        stride,
        force_capacity: false,
    };
    let report = py.detach(|| commands::cmd_simulate(&opts)).map_err(to_py)?;
    json(py, report.to_json().map_err(to_py)?)
}

#[pyfunction]
fn sweep<'py>(py: Python<'py>, k: usize, ns: Vec<usize>) -> PyResult<Bound<'py, PyAny>> {
    let report = py.detach(|| commands::cmd_sweep(k, &ns)).map_err(to_py)?;
    json(py, report.to_json().map_err(to_py)?)
}

/// Dense cross-check certificate as a dict; `passed` is the overall verdict.
#[pyfunction]
#[pyo3(signature = (n, k, tol=1e-10))]
fn validate<'py>(py: Python<'py>, n: usize, k: usize, tol: f64) -> PyResult<Bound<'py, PyAny>> {
    let cert = py.detach(|| commands::cmd_validate(n, k, tol)).map_err(to_py)?;
    json(py, cert.to_json().map_err(to_py)?)
}

#[pymodule]
fn johnson_walk(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyJohnsonGraph>()?;
    m.add_class::<PyReducedSearch>()?;
    m.add_class::<PyArcSearch>()?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(run_time, m)?)?;
    m.add_function(wrap_pyfunction!(eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    Ok(())
}
