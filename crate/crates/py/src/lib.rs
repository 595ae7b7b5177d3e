//! Python bindings.
//!
//! Structured results (profiles, summaries, reports) come back as plain
//! dicts. Failures raise `erhit.ErhitError`, a `ValueError` whose message
//! starts with the error's name.

use std::path::PathBuf;

use erhit_core::clt;
use erhit_core::coupling::{CoupledSequenceState, CouplingMode};
use erhit_core::graph::{self, GraphSample};
use erhit_core::hitting;
use erhit_core::io;
use erhit_core::rng::RNG_ID;
use erhit_core::spectral::{self, SpectralDecomposition};
use erhit_core::stats;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

create_exception!(erhit, ErhitError, PyValueError);

fn err(e: erhit_core::Error) -> PyErr {
    ErhitError::new_err(format!("{}: {e}", e.name()))
}

trait OrRaise<T> {
    fn or_raise(self) -> PyResult<T>;
}

impl<T> OrRaise<T> for erhit_core::Result<T> {
    fn or_raise(self) -> PyResult<T> {
        self.map_err(err)
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| err(e.into()))?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(name = "Graph", module = "erhit", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGraph(GraphSample);

#[pymethods]
impl PyGraph {
    #[staticmethod]
    #[pyo3(signature = (n, edges, p = 1.0, seed = 0))]
    fn from_edges(n: usize, edges: Vec<(usize, usize)>, p: f64, seed: u64) -> PyResult<Self> {
        GraphSample::from_edges(n, &edges, p, seed, RNG_ID).or_raise().map(Self)
    }

    /// Reads `<prefix>.csv` and `<prefix>.json`.
    #[staticmethod]
    fn read(prefix: PathBuf) -> PyResult<Self> {
        io::read_graph(&prefix).or_raise().map(Self)
    }

    fn write(&self, prefix: PathBuf) -> PyResult<()> {
        io::write_graph(&self.0, &prefix).or_raise().map(|_| ())
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn p(&self) -> f64 {
        self.0.p()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.0.seed()
    }

    #[getter]
    fn rng_id(&self) -> &str {
        self.0.rng_id()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.0.edge_count()
    }

    #[getter]
    fn degrees(&self) -> Vec<usize> {
        self.0.degrees().to_vec()
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.0.edges().collect()
    }

    fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.0.n() && j < self.0.n() && self.0.has_edge(i, j)
    }

    fn is_connected(&self) -> bool {
        graph::is_connected(&self.0)
    }

    fn stationary_distribution(&self) -> PyResult<Vec<f64>> {
        graph::stationary_distribution(&self.0).or_raise().map(|s| s.pi)
    }

    /// `(edge_count, degree of j, edges not touching j)`
    fn statistics(&self, j: usize) -> PyResult<(usize, usize, usize)> {
        let s = graph::graph_statistics(&self.0, j).or_raise()?;
        Ok((s.edge_count, s.degree, s.excluded_edge_count))
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph(n={}, p={:?}, seed={}, edges={})",
            self.0.n(),
            self.0.p(),
            self.0.seed(),
            self.0.edge_count()
        )
    }
}

#[pyclass(name = "Decomposition", module = "erhit", frozen)]
struct PyDecomposition(SpectralDecomposition);

#[pymethods]
impl PyDecomposition {
    #[getter]
    fn eigenvalues(&self) -> Vec<f64> {
        self.0.eigenvalues().to_vec()
    }

    fn eigenvector(&self, k: usize) -> PyResult<Vec<f64>> {
        if k >= self.0.n() {
            return Err(err(erhit_core::Error::IndexOutOfRange {
                index: k,
                n: self.0.n(),
            }));
        }
        Ok(self.0.eigenvector(k).to_vec())
    }

    #[getter]
    fn residual(&self) -> f64 {
        self.0.residual()
    }

    #[getter]
    fn degenerate(&self) -> bool {
        self.0.degenerate()
    }

    fn orthonormality_defect(&self) -> f64 {
        self.0.orthonormality_defect()
    }

    fn gap_statistic<'py>(&self, py: Python<'py>, n: usize, p: f64) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &spectral::spectral_gap_statistic(&self.0, n, p))
    }

    fn delocalization_statistic<'py>(&self, py: Python<'py>, n: usize, p: f64) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &spectral::delocalization_statistic(&self.0, n, p))
    }

    fn verify_identities<'py>(&self, py: Python<'py>, g: &PyGraph, j: usize) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &spectral::verify_spectral_identities(&self.0, &g.0, j).or_raise()?)
    }
}

#[pyclass(name = "CoupledSequence", module = "erhit")]
struct PyCoupledSequence(CoupledSequenceState);

#[pymethods]
impl PyCoupledSequence {
    /// `mode` is `"decreasing"` or `"increasing"`. Returns the chain and its
    /// first graph.
    #[staticmethod]
    fn start(n: usize, p: f64, mode: &str, seed: u64) -> PyResult<(Self, PyGraph)> {
        let mode = match mode {
            "decreasing" => CouplingMode::Decreasing,
            "increasing" => CouplingMode::IncreasingViaComplement,
            other => return Err(PyValueError::new_err(format!("unknown coupling mode {other:?}"))),
        };
        let (st, g) = CoupledSequenceState::start(n, p, mode, seed).or_raise()?;
        Ok((Self(st), PyGraph(g)))
    }

    fn advance(&mut self, p_next: f64) -> PyResult<PyGraph> {
        self.0.advance(p_next).or_raise().map(PyGraph)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.current_n()
    }

    #[getter]
    fn p(&self) -> f64 {
        self.0.current_p()
    }
}

#[pyfunction]
fn sample_er_graph(n: usize, p: f64, seed: u64) -> PyResult<PyGraph> {
    graph::sample_er_graph(n, p, seed).or_raise().map(PyGraph)
}

#[pyfunction]
fn decompose(g: &PyGraph) -> PyResult<PyDecomposition> {
    spectral::decompose_graph(&g.0).or_raise().map(PyDecomposition)
}

#[pyfunction]
fn hitting_time_spectral(dec: &PyDecomposition, g: &PyGraph, i: usize, j: usize) -> PyResult<f64> {
    hitting::hitting_time_spectral(&dec.0, &g.0, i, j).or_raise()
}

#[pyfunction]
fn hitting_times_solve(g: &PyGraph, j: usize) -> PyResult<Vec<f64>> {
    hitting::hitting_times_solve(&g.0, j).or_raise()
}

#[pyfunction]
fn mean_target_hitting_spectral<'py>(
    py: Python<'py>,
    dec: &PyDecomposition,
    g: &PyGraph,
    j: usize,
) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &hitting::mean_target_hitting_spectral(&dec.0, &g.0, j).or_raise()?)
}

#[pyfunction]
fn mean_target_from_column(g: &PyGraph, column: Vec<f64>) -> PyResult<f64> {
    hitting::mean_target_from_column(&g.0, &column).or_raise()
}

/// Returns `(mean, std_error)`.
#[pyfunction]
#[pyo3(signature = (g, i, j, trials, seed = 0))]
fn hitting_time_mc(py: Python<'_>, g: &PyGraph, i: usize, j: usize, trials: u64, seed: u64) -> PyResult<(f64, f64)> {
    let est = py
        .detach(|| hitting::hitting_time_mc(&g.0, i, j, trials, seed))
        .or_raise()?;
    Ok((est.mean, est.std_error))
}

#[pyfunction]
fn standardized_target_statistic(h_j: f64, n: usize, p: f64) -> PyResult<f64> {
    clt::standardized_target_statistic(h_j, n, p).or_raise()
}

#[pyfunction]
fn standardized_edge_statistic(g: &PyGraph, j: usize) -> PyResult<f64> {
    clt::standardized_edge_statistic(&g.0, j).or_raise()
}

#[pyfunction]
fn standardized_log_statistic(g: &PyGraph, j: usize) -> PyResult<f64> {
    clt::standardized_log_statistic(&g.0, j).or_raise()
}

#[pyfunction]
fn negligibility_diagnostics<'py>(
    py: Python<'py>,
    dec: &PyDecomposition,
    g: &PyGraph,
    j: usize,
    p: f64,
) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &clt::negligibility_diagnostics(&dec.0, &g.0, j, p).or_raise()?)
}

#[pyfunction]
fn summary_stats<'py>(py: Python<'py>, samples: Vec<f64>) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &stats::summary_stats(&samples).or_raise()?)
}

#[pyfunction]
fn ks_distance_normal(samples: Vec<f64>) -> PyResult<f64> {
    stats::ks_distance_normal(&samples).or_raise()
}

/// Runs an experiment from its JSON config; returns `(report, samples_csv)`.
#[pyfunction]
fn run_experiment<'py>(py: Python<'py>, config_json: &str) -> PyResult<(Bound<'py, PyAny>, String)> {
    let cfg: clt::ExperimentConfig = serde_json::from_str(config_json).map_err(|e| err(e.into()))?;
    let report = py.detach(|| clt::run_experiment(&cfg)).or_raise()?;
    Ok((to_py(py, &report)?, report.samples_csv()))
}

#[pymodule]
fn erhit(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ErhitError", m.py().get_type::<ErhitError>())?;
    m.add("RNG_ID", RNG_ID)?;
    m.add_class::<PyGraph>()?;
    m.add_class::<PyDecomposition>()?;
    m.add_class::<PyCoupledSequence>()?;
    m.add_function(wrap_pyfunction!(sample_er_graph, m)?)?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(hitting_time_spectral, m)?)?;
    m.add_function(wrap_pyfunction!(hitting_times_solve, m)?)?;
    m.add_function(wrap_pyfunction!(mean_target_hitting_spectral, m)?)?;
    m.add_function(wrap_pyfunction!(mean_target_from_column, m)?)?;
    m.add_function(wrap_pyfunction!(hitting_time_mc, m)?)?;
    m.add_function(wrap_pyfunction!(standardized_target_statistic, m)?)?;
    m.add_function(wrap_pyfunction!(standardized_edge_statistic, m)?)?;
    m.add_function(wrap_pyfunction!(standardized_log_statistic, m)?)?;
    m.add_function(wrap_pyfunction!(negligibility_diagnostics, m)?)?;
    m.add_function(wrap_pyfunction!(summary_stats, m)?)?;
    m.add_function(wrap_pyfunction!(ks_distance_normal, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
