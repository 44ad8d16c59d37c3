//! Python bindings: `import ctrl_robust`.

use num_rational::BigRational;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ctrl_robust::attack::{self, AttackSequence, ExhaustiveMode};
use ctrl_robust::controllability::{self, Criterion};
use ctrl_robust::enc::{self, RerBudget};
use ctrl_robust::enumeration;
use ctrl_robust::generators::{self, GeneratorParams, Model};
use ctrl_robust::{io, metrics, DirectedGraph, Side};

fn err(e: ctrl_robust::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse<T: std::str::FromStr<Err = ctrl_robust::Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(err)
}

fn side(s: &str) -> PyResult<Side> {
    match s {
        "out" => Ok(Side::Out),
        "in" => Ok(Side::In),
        other => Err(PyValueError::new_err(format!("side must be 'in' or 'out', got {other:?}"))),
    }
}

fn fraction<'py>(py: Python<'py>, x: &BigRational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?
        .getattr("Fraction")?
        .call1((format!("{}/{}", x.numer(), x.denom()),))
}

/// A simple directed graph on nodes `0..n`.
#[pyclass(name = "Graph", module = "ctrl_robust", frozen)]
struct PyGraph(DirectedGraph);

#[pymethods]
impl PyGraph {
    #[new]
    #[pyo3(signature = (n, edges=Vec::new()))]
    fn new(n: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        DirectedGraph::from_edges(n, edges).map(PyGraph).map_err(err)
    }

    #[staticmethod]
    fn cycle(n: usize) -> Self {
        PyGraph(DirectedGraph::cycle(n))
    }

    #[getter]
    fn node_count(&self) -> usize {
        self.0.node_count()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.0.edge_count()
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.0.edges().collect()
    }

    fn out_degrees(&self) -> Vec<usize> {
        self.0.degree_sequence(Side::Out)
    }

    fn in_degrees(&self) -> Vec<usize> {
        self.0.degree_sequence(Side::In)
    }

    fn has_edge(&self, u: usize, v: usize) -> bool {
        self.0.has_edge(u, v)
    }

    fn is_weakly_connected(&self) -> PyResult<bool> {
        self.0.is_weakly_connected().map_err(err)
    }

    fn remove_node(&self, v: usize) -> PyResult<Self> {
        self.0.remove_node(v).map(PyGraph).map_err(err)
    }

    /// Hex string of the canonical form (N <= 8).
    fn canonical_form(&self) -> PyResult<String> {
        self.0.canonical_form().map(|c| c.to_hex()).map_err(err)
    }

    fn to_edge_list(&self) -> String {
        io::emit_edge_list(&self.0)
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }

    fn __repr__(&self) -> String {
        format!("Graph(nodes={}, edges={})", self.0.node_count(), self.0.edge_count())
    }
}

#[pyfunction]
#[pyo3(signature = (g, criterion="structural"))]
fn drivers(g: &PyGraph, criterion: &str) -> PyResult<usize> {
    Ok(controllability::drivers(&g.0, parse(criterion)?).map_err(err)?.count)
}

#[pyfunction]
fn maximum_matching(g: &PyGraph) -> Vec<(usize, usize)> {
    controllability::maximum_matching(&g.0).matched_pairs
}

/// `n_D(i)` along one removal order of `N - 1` nodes.
#[pyfunction]
#[pyo3(signature = (g, order, criterion="structural"))]
fn curve(g: &PyGraph, order: Vec<usize>, criterion: &str) -> PyResult<Vec<f64>> {
    let seq = AttackSequence::new(order, g.0.node_count()).map_err(err)?;
    let c = attack::curve(&g.0, &seq, parse(criterion)?).map_err(err)?;
    Ok(c.values_f64())
}

#[pyfunction]
#[pyo3(signature = (g, runs, seed, criterion="structural"))]
fn random_attack<'py>(
    py: Python<'py>,
    g: &PyGraph,
    runs: usize,
    seed: u64,
    criterion: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let crit: Criterion = parse(criterion)?;
    let s = py.detach(|| attack::random_attack(&g.0, runs, seed, crit)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("mean", s.mean)?;
    d.set_item("std", s.std)?;
    d.set_item("run_scores", s.run_scores)?;
    d.set_item("rc", s.mean_rc.value)?;
    Ok(d)
}

/// Exact `<R_c>` over every removal order, as a `fractions.Fraction`.
#[pyfunction]
#[pyo3(signature = (g, mode="subsets", criterion="structural"))]
fn exhaustive_rc<'py>(
    py: Python<'py>,
    g: &PyGraph,
    mode: &str,
    criterion: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let mode = match mode {
        "subsets" => ExhaustiveMode::Subsets,
        "permutations" => ExhaustiveMode::Permutations,
        other => return Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
    };
    let crit: Criterion = parse(criterion)?;
    let score = py.detach(|| attack::exhaustive_rc(&g.0, mode, crit)).map_err(err)?;
    fraction(py, score.exact.as_ref().expect("exhaustive scores are exact"))
}

#[pyfunction]
fn check_enc<'py>(py: Python<'py>, g: &PyGraph) -> PyResult<Bound<'py, PyDict>> {
    let r = enc::check_enc(&g.0).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("satisfied", r.satisfied)?;
    d.set_item("lower", r.bounds.lower)?;
    d.set_item("upper", r.bounds.upper)?;
    let v: Vec<(usize, &str, usize)> = r
        .violations
        .iter()
        .map(|v| (v.node, v.side.as_str(), v.degree))
        .collect();
    d.set_item("violations", v)?;
    Ok(d)
}

/// Returns `(graph, operations applied, terminal reason)`.
#[pyfunction]
#[pyo3(signature = (g, seed, budget="unlimited"))]
fn rectify(py: Python<'_>, g: &PyGraph, seed: u64, budget: &str) -> PyResult<(PyGraph, usize, String)> {
    let budget: RerBudget = parse(budget)?;
    let (h, trace) = py.detach(|| enc::rectify(&g.0, budget, seed)).map_err(err)?;
    Ok((PyGraph(h), trace.operations_applied(), trace.reason.to_string()))
}

#[pyfunction]
fn generate(model: &str, nodes: usize, edges: usize, seed: u64) -> PyResult<PyGraph> {
    let model: Model = parse(model)?;
    generators::generate(&GeneratorParams::new(model, nodes, edges, seed))
        .map(PyGraph)
        .map_err(err)
}

/// One dict per isomorphism class with exact `<R_c>` and flags.
#[pyfunction]
#[pyo3(signature = (n, m, criterion="structural"))]
fn enumerate<'py>(py: Python<'py>, n: usize, m: usize, criterion: &str) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let crit: Criterion = parse(criterion)?;
    let eval = py
        .detach(|| enumeration::enumerate_instances(n, m).and_then(|c| enumeration::evaluate_catalog(&c, crit)))
        .map_err(err)?;
    eval.rows
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("canonical", r.canonical.to_hex())?;
            d.set_item("rc", fraction(py, &r.rc)?)?;
            d.set_item("enc", r.enc)?;
            d.set_item("optimal", r.optimal)?;
            Ok(d)
        })
        .collect()
}

#[pyfunction]
#[pyo3(signature = (g, side="out"))]
fn heterogeneity(g: &PyGraph, side: &str) -> PyResult<f64> {
    Ok(metrics::heterogeneity(&g.0, self::side(side)?).map_err(err)?.value)
}

/// Proportion of nodes removed before disconnection, one value per run.
#[pyfunction]
fn disconnection_threshold(g: &PyGraph, seed: u64, runs: usize) -> PyResult<Vec<f64>> {
    Ok(metrics::disconnection_threshold(&g.0, seed, runs).map_err(err)?.proportions)
}

#[pyfunction]
fn basic_features<'py>(py: Python<'py>, g: &PyGraph) -> PyResult<Bound<'py, PyDict>> {
    let f = metrics::basic_features(&g.0).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("average_degree", f.average_degree)?;
    d.set_item("average_path_length", f.average_path_length)?;
    d.set_item("average_betweenness", f.average_betweenness)?;
    d.set_item("clustering", f.clustering)?;
    d.set_item("h_out", f.h_out)?;
    d.set_item("h_in", f.h_in)?;
    Ok(d)
}

/// Returns `(graph, external labels, self-loops dropped, duplicates dropped)`.
#[pyfunction]
fn parse_edge_list(text: &str) -> PyResult<(PyGraph, Vec<u64>, usize, usize)> {
    let doc = io::parse_edge_list(text).map_err(err)?;
    Ok((PyGraph(doc.graph), doc.labels, doc.self_loops_dropped, doc.duplicates_dropped))
}

#[pymodule]
#[pyo3(name = "ctrl_robust")]
fn ctrl_robust_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_function(wrap_pyfunction!(drivers, m)?)?;
    m.add_function(wrap_pyfunction!(maximum_matching, m)?)?;
    m.add_function(wrap_pyfunction!(curve, m)?)?;
    m.add_function(wrap_pyfunction!(random_attack, m)?)?;
    m.add_function(wrap_pyfunction!(exhaustive_rc, m)?)?;
    m.add_function(wrap_pyfunction!(check_enc, m)?)?;
    m.add_function(wrap_pyfunction!(rectify, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate, m)?)?;
    m.add_function(wrap_pyfunction!(heterogeneity, m)?)?;
    m.add_function(wrap_pyfunction!(disconnection_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(basic_features, m)?)?;
    m.add_function(wrap_pyfunction!(parse_edge_list, m)?)?;
    Ok(())
}
