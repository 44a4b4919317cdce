//! Python bindings: degree sequences, graphs, the maximum-entropy solver,
//! tree statistics, samplers, rounding, and the concentration machinery.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use entropygraph::degseq::DegreeSequence;
use entropygraph::entropy::{
    mckay_log_count, q_model, solve_max_entropy, MaxEntropySolution,
};
use entropygraph::graphs::{
    BernoulliModel, BernoulliSampler, GraphSampler, Method, SamplerConfig, SimpleGraph,
    UniformGaSampler, UniformGdSampler,
};
use entropygraph::rounding::{round_to_integral, WeightedBipartiteGraph};
use entropygraph::stats::{
    empirical_lower_tail, full_tree_family, weighted_l_statistic, LMode, Law,
};
use entropygraph::trees::{
    enumerate_trees, normalized_tree_total, psi, weighted_embedding_sum_self, LabeledTree,
    OrderedTree,
};

fn val_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn run_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

/// A positive integer degree sequence, kept sorted ascending.
#[pyclass(name = "DegreeSequence")]
#[derive(Clone)]
struct PyDegreeSequence {
    inner: DegreeSequence,
}

#[pymethods]
impl PyDegreeSequence {
    #[new]
    fn new(degrees: Vec<u64>) -> PyResult<Self> {
        Ok(Self {
            inner: DegreeSequence::new(degrees).map_err(val_err)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn total(&self) -> u64 {
        self.inner.total()
    }

    #[getter]
    fn degrees(&self) -> Vec<u64> {
        self.inner.degrees().to_vec()
    }

    /// (strict_pass, nonstrict_pass, m_even)
    fn check_erdos_gallai(&self) -> (bool, bool, bool) {
        let r = self.inner.check_erdos_gallai();
        (r.strict_pass, r.nonstrict_pass, r.m_even)
    }

    /// Sorted indices i with d_i <= log^alpha(n).
    fn small_degree_set(&self, alpha: f64) -> Vec<usize> {
        self.inner.small_degree_set(alpha)
    }

    /// A witness graph with this exact degree sequence.
    fn havel_hakimi(&self) -> PyResult<PyGraph> {
        Ok(PyGraph {
            inner: self.inner.havel_hakimi().map_err(run_err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!("DegreeSequence({:?})", self.inner.degrees())
    }
}

/// An undirected simple graph on vertices 0..n.
#[pyclass(name = "Graph")]
#[derive(Clone)]
struct PyGraph {
    inner: SimpleGraph,
}

#[pymethods]
impl PyGraph {
    #[new]
    fn new(n: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        Ok(Self {
            inner: SimpleGraph::from_edges(n, &edges).map_err(val_err)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    fn degrees(&self) -> Vec<u64> {
        self.inner.degrees()
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges()
    }

    fn has_edge(&self, u: usize, v: usize) -> bool {
        self.inner.has_edge(u, v)
    }

    fn __repr__(&self) -> String {
        format!("Graph(n={}, edges={})", self.inner.n(), self.inner.edge_count())
    }
}

/// Fitted maximum-entropy edge model.
#[pyclass(name = "MaxEntropySolution")]
struct PySolution {
    inner: MaxEntropySolution,
}

#[pymethods]
impl PySolution {
    #[getter]
    fn r(&self) -> Vec<f64> {
        self.inner.r().to_vec()
    }

    #[getter]
    fn h1(&self) -> f64 {
        self.inner.h1()
    }

    #[getter]
    fn residual(&self) -> f64 {
        self.inner.max_residual()
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations()
    }

    #[getter]
    fn converged(&self) -> bool {
        self.inner.converged()
    }

    /// Edge probability r_i r_j / (1 + r_i r_j).
    fn p(&self, i: usize, j: usize) -> f64 {
        self.inner.p_tilde(i, j)
    }
}

/// Fits the maximum-entropy model to a strictly graphic degree sequence.
#[pyfunction]
#[pyo3(signature = (d, tol=1e-10, max_iter=10_000))]
fn solve(d: &PyDegreeSequence, tol: f64, max_iter: usize) -> PyResult<PySolution> {
    Ok(PySolution {
        inner: solve_max_entropy(&d.inner, tol, max_iter).map_err(run_err)?,
    })
}

/// Sparse surrogate probabilities q_ij = d_i d_j / (M + d_i d_j) as a matrix.
#[pyfunction]
fn q_matrix(d: &PyDegreeSequence) -> Vec<Vec<f64>> {
    let q = q_model(&d.inner);
    let n = d.inner.n();
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 0.0 } else { q.q(i, j) }).collect())
        .collect()
}

/// Logarithm of the asymptotic count of graphs with degrees exactly D.
#[pyfunction]
fn log_count(d: &PyDegreeSequence) -> PyResult<f64> {
    mckay_log_count(&d.inner).map_err(val_err)
}

/// Edge lists of all labeled trees on k vertices (Cayley: k^(k-2) of them).
#[pyfunction]
fn trees(k: usize) -> PyResult<Vec<Vec<(usize, usize)>>> {
    Ok(enumerate_trees(k)
        .map_err(val_err)?
        .iter()
        .map(|t| t.edges().to_vec())
        .collect())
}

/// B-function of a placed tree against a degree sequence.
#[pyfunction]
fn b_function(
    tree_edges: Vec<(usize, usize)>,
    placement: Vec<usize>,
    d: &PyDegreeSequence,
) -> PyResult<f64> {
    let k = placement.len();
    let tree = LabeledTree::new(k, tree_edges).map_err(val_err)?;
    let ot = OrderedTree::new(tree, placement).map_err(val_err)?;
    Ok(psi(&ot, &d.inner))
}

/// Weighted embedding sum F(T, G) with weights from G's own degrees.
#[pyfunction]
#[pyo3(signature = (tree_edges, g, budget=100_000_000))]
fn embedding_sum(
    tree_edges: Vec<(usize, usize)>,
    g: &PyGraph,
    budget: u64,
) -> PyResult<f64> {
    let k = tree_edges.len() + 1;
    let tree = LabeledTree::new(k, tree_edges).map_err(val_err)?;
    weighted_embedding_sum_self(&tree, &g.inner, budget).map_err(run_err)
}

/// (1/M) sum of F(T, G) over all labeled k-trees; approaches k^(k-2).
#[pyfunction]
#[pyo3(signature = (g, k, budget=100_000_000))]
fn tree_total(g: &PyGraph, k: usize, budget: u64) -> PyResult<f64> {
    normalized_tree_total(&g.inner, k, budget).map_err(run_err)
}

/// Draws graphs: method one of "exact", "switch", "toggle" (needs a),
/// "tilde", "q".
#[pyfunction]
#[pyo3(signature = (d, method, count, seed, a=None))]
fn sample(
    d: &PyDegreeSequence,
    method: &str,
    count: usize,
    seed: u64,
    a: Option<f64>,
) -> PyResult<Vec<PyGraph>> {
    let mut sampler: Box<dyn GraphSampler> = match method {
        "exact" => Box::new(
            UniformGdSampler::new(&d.inner, SamplerConfig::new(seed, Method::ExactEnum))
                .map_err(run_err)?,
        ),
        "switch" => Box::new(
            UniformGdSampler::new(&d.inner, SamplerConfig::new(seed, Method::SwitchMcmc))
                .map_err(run_err)?,
        ),
        "toggle" => {
            let a = a.ok_or_else(|| val_err("method 'toggle' requires a"))?;
            Box::new(
                UniformGaSampler::new(&d.inner, a, SamplerConfig::new(seed, Method::ToggleMcmc))
                    .map_err(run_err)?,
            )
        }
        "tilde" => {
            let sol = solve_max_entropy(&d.inner, 1e-10, 10_000).map_err(run_err)?;
            Box::new(BernoulliSampler::new(BernoulliModel::from_solution(&sol), seed))
        }
        "q" => Box::new(BernoulliSampler::new(
            BernoulliModel::from_q_model(&q_model(&d.inner)),
            seed,
        )),
        other => return Err(val_err(format!("unknown method {other:?}"))),
    };
    Ok((0..count)
        .map(|_| PyGraph {
            inner: sampler.sample(),
        })
        .collect())
}

fn parse_law(name: &str, a: f64) -> PyResult<Law> {
    Ok(match name {
        "tilde" => Law::Tilde,
        "q" => Law::Q,
        "uniform_gd" => Law::UniformGd,
        "uniform_ga" => Law::UniformGa { a },
        other => return Err(val_err(format!("unknown law {other:?}"))),
    })
}

/// Exact tiny-scale weighted L-discrepancy; returns (value, signed_total).
#[pyfunction]
#[pyo3(signature = (d, k, law1, law2, a=0.6))]
fn l_statistic(
    d: &PyDegreeSequence,
    k: usize,
    law1: &str,
    law2: &str,
    a: f64,
) -> PyResult<(f64, f64)> {
    let rep = weighted_l_statistic(
        &d.inner,
        k,
        parse_law(law1, a)?,
        parse_law(law2, a)?,
        LMode::ExactTiny,
        0,
    )
    .map_err(run_err)?;
    Ok((rep.value, rep.signed_total))
}

/// Lower-tail check for the placed k-tree family under the fitted model:
/// returns (lambda, delta1, delta2, bound, empirical_frequency, pass).
#[pyfunction]
#[pyo3(signature = (d, k, eps, reps=10_000, seed=42))]
fn lower_tail(
    d: &PyDegreeSequence,
    k: usize,
    eps: f64,
    reps: usize,
    seed: u64,
) -> PyResult<(f64, f64, f64, f64, f64, bool)> {
    let sol = solve_max_entropy(&d.inner, 1e-10, 10_000).map_err(run_err)?;
    let model = BernoulliModel::from_solution(&sol);
    let fam = full_tree_family(&d.inner, k).map_err(run_err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rep = empirical_lower_tail(&fam, &model, eps, reps, &mut rng).map_err(run_err)?;
    Ok((
        rep.lambda,
        rep.delta1,
        rep.delta2,
        rep.bound,
        rep.frequency,
        rep.pass,
    ))
}

/// Rounds a fractional bipartite weight matrix (rows x cols, entries in
/// [0, 1]) to 0-1 edges; returns (edges, augmentation_count). Columns are
/// offset by the row count in the returned vertex ids.
#[pyfunction]
fn round_bipartite(weights: Vec<Vec<f64>>) -> PyResult<(Vec<(usize, usize)>, usize)> {
    let n1 = weights.len();
    let n2 = weights.first().map_or(0, |r| r.len());
    if weights.iter().any(|r| r.len() != n2) {
        return Err(val_err("ragged weight matrix"));
    }
    let mut w = WeightedBipartiteGraph::new(n1, n2);
    for (i, row) in weights.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            w.set(i, j, x).map_err(val_err)?;
        }
    }
    let (g, trace) = round_to_integral(&w).map_err(run_err)?;
    Ok((g.edges(), trace.augmentations.len()))
}

#[pymodule]
fn _entropygraph(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDegreeSequence>()?;
    m.add_class::<PyGraph>()?;
    m.add_class::<PySolution>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(q_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(log_count, m)?)?;
    m.add_function(wrap_pyfunction!(trees, m)?)?;
    m.add_function(wrap_pyfunction!(b_function, m)?)?;
    m.add_function(wrap_pyfunction!(embedding_sum, m)?)?;
    m.add_function(wrap_pyfunction!(tree_total, m)?)?;
    m.add_function(wrap_pyfunction!(sample, m)?)?;
    m.add_function(wrap_pyfunction!(l_statistic, m)?)?;
    m.add_function(wrap_pyfunction!(lower_tail, m)?)?;
    m.add_function(wrap_pyfunction!(round_bipartite, m)?)?;
    Ok(())
}
