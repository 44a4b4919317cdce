//! Maximum-entropy edge models fitted to degree sequences.
//!
//! The central object is the weight vector `r` with edge probabilities
//! `p_ij = r_i r_j / (1 + r_i r_j)` chosen so the expected degree of every
//! vertex matches its target. Also here: the bipartite variant, the sparse
//! q-model surrogate, the dual objectives used to cross-check fits, and the
//! log-gamma graph-count estimate.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::degseq::DegreeSequence;
use crate::graphs::SimpleGraph;

#[derive(Debug, Error)]
pub enum EntropyError {
    #[error("strict graphicality fails: the optimum lies on the polytope boundary")]
    BoundaryOptimum,
    #[error("no convergence after {iterations} sweeps (residual {residual:.3e})")]
    NonConvergence { residual: f64, iterations: usize },
    #[error("sum of D1 must equal sum of D2 (got {0} vs {1})")]
    SumMismatch(u64, u64),
    #[error("total degree M must be even, got {0}")]
    OddM(u64),
}

/// Binary entropy `H(x) = -x ln x - (1-x) ln(1-x)` in nats; 0 at the endpoints.
pub fn binary_entropy(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -x * x.ln() - (1.0 - x) * (1.0 - x).ln()
}

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// A fitted maximum-entropy model: positive weights `r` with
/// `p_ij = r_i r_j / (1 + r_i r_j)` reproducing the target degrees.
///
/// Vertex order follows the sorted order of the input [`DegreeSequence`].
#[derive(Debug, Clone, Serialize)]
pub struct MaxEntropySolution {
    r: Vec<f64>,
    degree_residuals: Vec<f64>,
    h1: f64,
    converged: bool,
    iterations: usize,
}

impl MaxEntropySolution {
    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn n(&self) -> usize {
        self.r.len()
    }

    /// Edge probability for `i != j`.
    pub fn p_tilde(&self, i: usize, j: usize) -> f64 {
        assert_ne!(i, j);
        let rr = self.r[i] * self.r[j];
        rr / (1.0 + rr)
    }

    pub fn degree_residuals(&self) -> &[f64] {
        &self.degree_residuals
    }

    pub fn max_residual(&self) -> f64 {
        self.degree_residuals
            .iter()
            .fold(0.0f64, |acc, &x| acc.max(x.abs()))
    }

    /// `H1 = sum over pairs of H(p_ij)` in nats.
    pub fn h1(&self) -> f64 {
        self.h1
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Empirical `max_i |log r_i| / log n`, reported but never asserted.
    pub fn max_abs_log_r_over_log_n(&self) -> f64 {
        let n = self.r.len() as f64;
        self.r
            .iter()
            .fold(0.0f64, |acc, &ri| acc.max(ri.ln().abs()))
            / n.ln()
    }
}

fn residuals(d: &DegreeSequence, r: &[f64]) -> Vec<f64> {
    let n = r.len();
    (0..n)
        .map(|i| {
            let mut s = 0.0;
            for j in 0..n {
                if j != i {
                    let rr = r[i] * r[j];
                    s += rr / (1.0 + rr);
                }
            }
            s - d.degree(i) as f64
        })
        .collect()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |acc, &x| acc.max(x.abs()))
}

/// `H1` computed by streaming over pairs; no matrix is materialized.
pub fn entropy_h1_of_r(r: &[f64]) -> f64 {
    let n = r.len();
    let mut h = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let rr = r[i] * r[j];
            h += binary_entropy(rr / (1.0 + rr));
        }
    }
    h
}

/// `H1` of a fitted solution.
pub fn entropy_h1(sol: &MaxEntropySolution) -> f64 {
    sol.h1()
}

/// Fits the maximum-entropy model to `D`.
///
/// Strict graphicality is checked first: without it the optimum sits on the
/// polytope boundary and no finite `r` exists. The solver runs the cheap
/// fixed-point sweep `r_i <- d_i / sum_{j != i} r_j / (1 + r_i r_j)` from
/// `r_i = d_i / sqrt(M)`, and switches to damped Newton on the convex dual if
/// the residual stalls for 10 consecutive sweeps.
pub fn solve_max_entropy(
    d: &DegreeSequence,
    tol: f64,
    max_iter: usize,
) -> Result<MaxEntropySolution, EntropyError> {
    let report = d.check_erdos_gallai();
    if !report.strict_pass {
        return Err(EntropyError::BoundaryOptimum);
    }
    let n = d.n();
    let m = d.total() as f64;
    let mut r: Vec<f64> = (0..n).map(|i| d.degree(i) as f64 / m.sqrt()).collect();
    let mut best = f64::INFINITY;
    let mut stalled = 0usize;
    let mut iterations = 0usize;
    let mut use_newton = false;

    while iterations < max_iter {
        iterations += 1;
        if use_newton {
            newton_sweep(d, &mut r);
        } else {
            // Jacobi-style fixed point: all updates read the previous sweep
            let old = r.clone();
            for i in 0..n {
                let mut s = 0.0;
                for (j, &rj) in old.iter().enumerate() {
                    if j != i {
                        s += rj / (1.0 + old[i] * rj);
                    }
                }
                r[i] = d.degree(i) as f64 / s;
            }
        }
        let res = max_abs(&residuals(d, &r));
        if res <= tol {
            let residuals = residuals(d, &r);
            return Ok(MaxEntropySolution {
                h1: entropy_h1_of_r(&r),
                r,
                degree_residuals: residuals,
                converged: true,
                iterations,
            });
        }
        if res < best * (1.0 - 1e-12) {
            best = res;
            stalled = 0;
        } else {
            stalled += 1;
            if stalled >= 10 {
                use_newton = true;
            }
        }
    }
    Err(EntropyError::NonConvergence {
        residual: max_abs(&residuals(d, &r)),
        iterations,
    })
}

/// One damped Newton step on the dual `F(x)` at `x = log r`, with a
/// backtracking line search on `F`; updates `r` in place.
fn newton_sweep(d: &DegreeSequence, r: &mut [f64]) {
    let n = r.len();
    let x: Vec<f64> = r.iter().map(|&ri| ri.ln()).collect();
    let duals = dual_objectives(d, &x);
    let grad = DVector::from_vec(duals.grad_f.clone());
    let mut hess = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if j != i {
                let rr = r[i] * r[j];
                let p = rr / (1.0 + rr);
                let w = p * (1.0 - p);
                hess[(i, j)] = w;
                diag += w;
            }
        }
        hess[(i, i)] = diag;
    }
    // tiny ridge keeps the factorization stable near-degenerate instances
    for i in 0..n {
        hess[(i, i)] += 1e-12;
    }
    let step = hess
        .lu()
        .solve(&grad)
        .unwrap_or_else(|| grad.clone());
    let f0 = duals.f_value;
    let mut alpha = 1.0;
    for _ in 0..60 {
        let xt: Vec<f64> = (0..n).map(|i| x[i] - alpha * step[i]).collect();
        if dual_objectives(d, &xt).f_value < f0 {
            for i in 0..n {
                r[i] = xt[i].exp();
            }
            return;
        }
        alpha *= 0.5;
    }
    // no descent found: leave r unchanged (outer loop reports stagnation)
}

/// Values and analytic gradients of the two dual objectives at one point.
///
/// `F` reads the input as log-weights `x = log r`; `G` reads the same input
/// as the weights themselves, so `g_value`/`grad_g` are `None` when any
/// coordinate is non-positive. At the optimum both equal `H1`.
#[derive(Debug, Clone, Serialize)]
pub struct DualObjectives {
    pub f_value: f64,
    pub grad_f: Vec<f64>,
    pub g_value: Option<f64>,
    pub grad_g: Option<Vec<f64>>,
}

/// `F(x) = -sum d_i x_i + sum_{i<j} log(1 + e^{x_i + x_j})` and
/// `G(r) = -sum d_i log r_i + sum_{i<j} log(1 + r_i r_j)`.
pub fn dual_objectives(d: &DegreeSequence, x: &[f64]) -> DualObjectives {
    let n = d.n();
    assert_eq!(n, x.len());
    let mut f = 0.0;
    let mut grad_f = vec![0.0; n];
    for i in 0..n {
        let di = d.degree(i) as f64;
        f -= di * x[i];
        grad_f[i] = -di;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let s = x[i] + x[j];
            // log(1 + e^s), stable for large |s|
            f += if s > 0.0 {
                s + (-s).exp().ln_1p()
            } else {
                s.exp().ln_1p()
            };
            let p = 1.0 / (1.0 + (-s).exp());
            grad_f[i] += p;
            grad_f[j] += p;
        }
    }
    let positive = x.iter().all(|&xi| xi > 0.0);
    let (g_value, grad_g) = if positive {
        let mut g = 0.0;
        let mut grad = vec![0.0; n];
        for i in 0..n {
            let di = d.degree(i) as f64;
            g -= di * x[i].ln();
            grad[i] = -di / x[i];
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let rr = x[i] * x[j];
                g += rr.ln_1p();
                grad[i] += x[j] / (1.0 + rr);
                grad[j] += x[i] / (1.0 + rr);
            }
        }
        (Some(g), Some(grad))
    } else {
        (None, None)
    };
    DualObjectives {
        f_value: f,
        grad_f,
        g_value,
        grad_g,
    }
}

/// `log P(G~ = G) = sum_i deg_G(i) log r_i - sum_{i<j} log(1 + r_i r_j)`.
pub fn log_prob_graph(sol: &MaxEntropySolution, g: &SimpleGraph) -> f64 {
    let n = sol.n();
    assert_eq!(n, g.n(), "graph must live on the model's vertex set");
    let r = sol.r();
    let mut v = 0.0;
    for i in 0..n {
        v += g.degree(i) as f64 * r[i].ln();
    }
    for i in 0..n {
        for j in (i + 1)..n {
            v -= (r[i] * r[j]).ln_1p();
        }
    }
    v
}

/// Fitted bipartite maximum-entropy model: `p_ij = r1_i r2_j / (1 + r1_i r2_j)`
/// with rows reproducing `D1` and columns reproducing `D2`.
#[derive(Debug, Clone, Serialize)]
pub struct BipartiteMaxEntropySolution {
    r1: Vec<f64>,
    r2: Vec<f64>,
    h2: f64,
    converged: bool,
    iterations: usize,
    row_residuals: Vec<f64>,
    col_residuals: Vec<f64>,
}

impl BipartiteMaxEntropySolution {
    pub fn r1(&self) -> &[f64] {
        &self.r1
    }

    pub fn r2(&self) -> &[f64] {
        &self.r2
    }

    /// `H2 = sum over all (row, column) cells of H(p_ij)`.
    pub fn h2(&self) -> f64 {
        self.h2
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Edge probability for row `i`, column `j`.
    pub fn p_tilde(&self, i: usize, j: usize) -> f64 {
        let rr = self.r1[i] * self.r2[j];
        rr / (1.0 + rr)
    }

    pub fn row_residuals(&self) -> &[f64] {
        &self.row_residuals
    }

    pub fn col_residuals(&self) -> &[f64] {
        &self.col_residuals
    }

    pub fn max_residual(&self) -> f64 {
        max_abs(&self.row_residuals).max(max_abs(&self.col_residuals))
    }
}

// Weight blow-up past this threshold means the bipartite polytope has no
// interior (some cell is forced to probability 1): report non-convergence.
const BIPARTITE_BLOWUP: f64 = 1e12;

/// Fits the bipartite model by alternating fixed-point sweeps on `r1`, `r2`.
pub fn solve_bipartite_max_entropy(
    d1: &DegreeSequence,
    d2: &DegreeSequence,
    tol: f64,
    max_iter: usize,
) -> Result<BipartiteMaxEntropySolution, EntropyError> {
    if d1.total() != d2.total() {
        return Err(EntropyError::SumMismatch(d1.total(), d2.total()));
    }
    let (n1, n2) = (d1.n(), d2.n());
    let m = d1.total() as f64;
    let mut r1: Vec<f64> = (0..n1).map(|i| d1.degree(i) as f64 / m.sqrt()).collect();
    let mut r2: Vec<f64> = (0..n2).map(|j| d2.degree(j) as f64 / m.sqrt()).collect();
    let mut iterations = 0usize;
    while iterations < max_iter {
        iterations += 1;
        for i in 0..n1 {
            let s: f64 = r2.iter().map(|&b| b / (1.0 + r1[i] * b)).sum();
            r1[i] = d1.degree(i) as f64 / s;
        }
        for j in 0..n2 {
            let s: f64 = r1.iter().map(|&a| a / (1.0 + a * r2[j])).sum();
            r2[j] = d2.degree(j) as f64 / s;
        }
        if r1.iter().chain(r2.iter()).any(|&v| v > BIPARTITE_BLOWUP || !v.is_finite()) {
            return Err(EntropyError::NonConvergence {
                residual: f64::INFINITY,
                iterations,
            });
        }
        let (rows, cols) = bipartite_residuals(d1, d2, &r1, &r2);
        if max_abs(&rows).max(max_abs(&cols)) <= tol {
            let mut h2 = 0.0;
            for &a in &r1 {
                for &b in &r2 {
                    let rr = a * b;
                    h2 += binary_entropy(rr / (1.0 + rr));
                }
            }
            return Ok(BipartiteMaxEntropySolution {
                r1,
                r2,
                h2,
                converged: true,
                iterations,
                row_residuals: rows,
                col_residuals: cols,
            });
        }
    }
    let (rows, cols) = bipartite_residuals(d1, d2, &r1, &r2);
    Err(EntropyError::NonConvergence {
        residual: max_abs(&rows).max(max_abs(&cols)),
        iterations,
    })
}

fn bipartite_residuals(
    d1: &DegreeSequence,
    d2: &DegreeSequence,
    r1: &[f64],
    r2: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let rows = (0..r1.len())
        .map(|i| {
            r2.iter()
                .map(|&b| {
                    let rr = r1[i] * b;
                    rr / (1.0 + rr)
                })
                .sum::<f64>()
                - d1.degree(i) as f64
        })
        .collect();
    let cols = (0..r2.len())
        .map(|j| {
            r1.iter()
                .map(|&a| {
                    let rr = a * r2[j];
                    rr / (1.0 + rr)
                })
                .sum::<f64>()
                - d2.degree(j) as f64
        })
        .collect();
    (rows, cols)
}

/// Sparse surrogate model `q_ij = d_i d_j / (M + d_i d_j)` with its expected
/// degrees and the sandwich check `d_i (1 - 2 d_i d_n / M) <= d_q(i) <= d_i`.
#[derive(Debug, Clone, Serialize)]
pub struct QModel {
    degrees: Vec<u64>,
    total: u64,
    q_degrees: Vec<f64>,
    sandwich_violations: Vec<usize>,
}

impl QModel {
    pub fn degrees(&self) -> &[u64] {
        &self.degrees
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// `q_ij` for `i != j`.
    pub fn q(&self, i: usize, j: usize) -> f64 {
        assert_ne!(i, j);
        let dd = (self.degrees[i] * self.degrees[j]) as f64;
        dd / (self.total as f64 + dd)
    }

    /// Expected degrees `d_q(i) = sum_{j != i} q_ij`.
    pub fn q_degrees(&self) -> &[f64] {
        &self.q_degrees
    }

    /// Sorted vertex positions where the sandwich bounds fail (normally empty).
    pub fn sandwich_violations(&self) -> &[usize] {
        &self.sandwich_violations
    }

    pub fn sandwich_holds(&self) -> bool {
        self.sandwich_violations.is_empty()
    }
}

/// Builds the q-model for `D` and evaluates the sandwich bounds.
pub fn q_model(d: &DegreeSequence) -> QModel {
    let n = d.n();
    let m = d.total() as f64;
    let dn = d.max_degree() as f64;
    let degrees: Vec<u64> = d.degrees().to_vec();
    let q_degrees: Vec<f64> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let dd = (degrees[i] * degrees[j]) as f64;
                    dd / (m + dd)
                })
                .sum()
        })
        .collect();
    let sandwich_violations = (0..n)
        .filter(|&i| {
            let di = degrees[i] as f64;
            let lower = di * (1.0 - 2.0 * di * dn / m);
            !(lower <= q_degrees[i] + 1e-12 && q_degrees[i] <= di + 1e-12)
        })
        .collect();
    QModel {
        degrees,
        total: d.total(),
        q_degrees,
        sandwich_violations,
    }
}

/// Structural checks (a)-(d) on a fitted weight vector.
#[derive(Debug, Clone, Serialize)]
pub struct RRegularityReport {
    /// (a) `r` non-decreasing along the sorted degree order.
    pub monotone: bool,
    /// (b) `r_1 r_n > 1/n`.
    pub product_bound: bool,
    /// (c) for each `k` with `r_k >= 1`: `r_{k+1} / r_k < n^4`.
    pub ratio_bound: bool,
    /// (d) whenever `r_k > n^2`: the `n - d_k - 1` smallest degrees sum to <= M/2.
    pub tail_bound: bool,
    /// First sorted position violating each check, if any: `[a, b, c, d]`.
    pub witnesses: [Option<usize>; 4],
}

impl RRegularityReport {
    pub fn all_pass(&self) -> bool {
        self.monotone && self.product_bound && self.ratio_bound && self.tail_bound
    }
}

pub fn r_regularity_report(sol: &MaxEntropySolution, d: &DegreeSequence) -> RRegularityReport {
    let r = sol.r();
    let n = r.len();
    let nf = n as f64;
    let mut witnesses: [Option<usize>; 4] = [None; 4];

    // allow relative slack at machine precision: symmetric vertices converge
    // to equal weights only up to rounding
    let monotone_at = (0..n - 1).find(|&i| r[i] > r[i + 1] * (1.0 + 1e-9));
    witnesses[0] = monotone_at;

    let product_bound = r[0] * r[n - 1] > 1.0 / nf;
    if !product_bound {
        witnesses[1] = Some(0);
    }

    let ratio_at = (0..n - 1).find(|&k| r[k] >= 1.0 && r[k + 1] / r[k] >= nf.powi(4));
    witnesses[2] = ratio_at;

    let mut prefix = vec![0u64; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + d.degree(i);
    }
    let tail_at = (0..n).find(|&k| {
        if r[k] <= nf * nf {
            return false;
        }
        let cut = n.saturating_sub(d.degree(k) as usize + 1);
        2 * prefix[cut] > d.total()
    });
    witnesses[3] = tail_at;

    RRegularityReport {
        monotone: monotone_at.is_none(),
        product_bound,
        ratio_bound: ratio_at.is_none(),
        tail_bound: tail_at.is_none(),
        witnesses,
    }
}

/// `C1(D) = |log delta| * n * log^{10/a1}(n)` with
/// `delta = min over pairs of min(p_ij, 1 - p_ij)` and `a1 = a - 1/2`.
pub fn c1_of_d(d: &DegreeSequence, sol: &MaxEntropySolution, a: f64) -> f64 {
    assert!(0.5 < a && a < 1.0);
    let n = sol.n();
    let mut delta = f64::INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            let p = sol.p_tilde(i, j);
            delta = delta.min(p.min(1.0 - p));
        }
    }
    let a1 = a - 0.5;
    let _ = d;
    delta.ln().abs() * n as f64 * (n as f64).ln().powf(10.0 / a1)
}

/// `C2(D) = sum_i d_i^a |log r_i|`.
pub fn c2_of_d(d: &DegreeSequence, sol: &MaxEntropySolution, a: f64) -> f64 {
    (0..d.n())
        .map(|i| (d.degree(i) as f64).powf(a) * sol.r()[i].ln().abs())
        .sum()
}

/// `log k!` by exact summation (integer arguments only, so this equals
/// log-gamma at `k + 1`).
fn ln_factorial(k: u64) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// Log of the pairing-model estimate for `|G^D|`:
/// `log[ M! e^{-lam - lam^2} / ((M/2)! 2^{M/2} prod_i d_i!) ]`,
/// `lam = (1/M) sum_i C(d_i, 2)`.
pub fn mckay_log_count(d: &DegreeSequence) -> Result<f64, EntropyError> {
    let m = d.total();
    if m % 2 != 0 {
        return Err(EntropyError::OddM(m));
    }
    let lam: f64 = d
        .degrees()
        .iter()
        .map(|&di| (di * di.saturating_sub(1)) as f64 / 2.0)
        .sum::<f64>()
        / m as f64;
    let mut v = ln_factorial(m) - lam - lam * lam;
    v -= ln_factorial(m / 2);
    v -= (m as f64 / 2.0) * 2f64.ln();
    for &di in d.degrees() {
        v -= ln_factorial(di);
    }
    Ok(v)
}
