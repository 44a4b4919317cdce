//! Constructive rounding of fractional bipartite edge weights to a 0-1 graph.
//!
//! Given weights `w(i, j) in [0, 1]` on a bipartite vertex set, the procedure
//! kills all "live" edges (those with fractional weight) in two stages: cycle
//! augmentations first (which preserve every fractional degree exactly), then
//! maximal-path augmentations. The output graph's degrees round the initial
//! fractional degrees: `b_v` is `floor(D(v))` or `floor(D(v)) + 1`.

use serde::Serialize;
use thiserror::Error;

use crate::degseq::DegreeSequence;
use crate::entropy::MaxEntropySolution;
use crate::graphs::SimpleGraph;

#[derive(Debug, Error)]
pub enum RoundingError {
    #[error("weight {w} at ({i}, {j}) outside [0, 1]")]
    WeightOutOfRange { i: usize, j: usize, w: f64 },
    #[error("column index {0} out of range for n2 = {1}")]
    ColOutOfRange(usize, usize),
    #[error("row index {0} out of range for n1 = {1}")]
    RowOutOfRange(usize, usize),
}

/// Weights within this distance of 0 or 1 are snapped and declared dead.
pub const SNAP: f64 = 1e-9;

/// Fractional edge weights on the complete bipartite vertex set
/// `rows 0..n1` x `cols 0..n2`. Absent pairs have weight 0.
#[derive(Debug, Clone)]
pub struct WeightedBipartiteGraph {
    n1: usize,
    n2: usize,
    w: Vec<Vec<f64>>,
}

impl WeightedBipartiteGraph {
    pub fn new(n1: usize, n2: usize) -> Self {
        Self {
            n1,
            n2,
            w: vec![vec![0.0; n2]; n1],
        }
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn set(&mut self, i: usize, j: usize, w: f64) -> Result<(), RoundingError> {
        if i >= self.n1 {
            return Err(RoundingError::RowOutOfRange(i, self.n1));
        }
        if j >= self.n2 {
            return Err(RoundingError::ColOutOfRange(j, self.n2));
        }
        if !(0.0..=1.0).contains(&w) || !w.is_finite() {
            return Err(RoundingError::WeightOutOfRange { i, j, w });
        }
        self.w[i][j] = w;
        Ok(())
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.w[i][j]
    }

    /// Initial fractional degree of row `i`.
    pub fn row_degree(&self, i: usize) -> f64 {
        self.w[i].iter().sum()
    }

    /// Initial fractional degree of column `j`.
    pub fn col_degree(&self, j: usize) -> f64 {
        self.w.iter().map(|row| row[j]).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AugmentationKind {
    Cycle,
    Path,
}

/// One augmentation step: alternating `+c/-c` along the listed edges
/// (`(row, col)` pairs, path/cycle order), the first edge receiving `+c`.
#[derive(Debug, Clone, Serialize)]
pub struct Augmentation {
    pub kind: AugmentationKind,
    pub edges: Vec<(usize, usize)>,
    pub c: f64,
    /// Edges whose weight reached 0 or 1 in this step.
    pub killed: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct RoundingTrace {
    pub augmentations: Vec<Augmentation>,
}

fn is_live(w: f64) -> bool {
    w > SNAP && w < 1.0 - SNAP
}

fn snap(w: f64) -> f64 {
    if w <= SNAP {
        0.0
    } else if w >= 1.0 - SNAP {
        1.0
    } else {
        w
    }
}

/// Rounds `input` to a 0-1 bipartite graph on `n1 + n2` vertices (columns
/// offset by `n1`), with the per-vertex degree guarantee
/// `b_v in {floor(D(v)), floor(D(v)) + 1}` for the initial fractional `D(v)`.
pub fn round_to_integral(
    input: &WeightedBipartiteGraph,
) -> Result<(SimpleGraph, RoundingTrace), RoundingError> {
    let (n1, n2) = (input.n1, input.n2);
    for i in 0..n1 {
        for j in 0..n2 {
            let w = input.w[i][j];
            if !(0.0..=1.0).contains(&w) || !w.is_finite() {
                return Err(RoundingError::WeightOutOfRange { i, j, w });
            }
        }
    }
    let mut w: Vec<Vec<f64>> = input
        .w
        .iter()
        .map(|row| row.iter().map(|&x| snap(x)).collect())
        .collect();
    let mut trace = RoundingTrace::default();

    // stage 1: kill live cycles
    while let Some(cycle) = find_live_cycle(&w, n1, n2) {
        let aug = augment(&mut w, AugmentationKind::Cycle, cycle);
        trace.augmentations.push(aug);
    }
    // stage 2: kill maximal live paths
    while let Some(path) = find_maximal_live_path(&w, n1, n2) {
        let aug = augment(&mut w, AugmentationKind::Path, path);
        trace.augmentations.push(aug);
    }

    let mut g = SimpleGraph::empty(n1 + n2);
    for (i, row) in w.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            debug_assert!(x == 0.0 || x == 1.0);
            if x == 1.0 {
                g.add_edge(i, n1 + j).unwrap();
            }
        }
    }
    Ok((g, trace))
}

/// Applies alternating `+c/-c` along `edges` with the exact max feasible `c`.
fn augment(
    w: &mut [Vec<f64>],
    kind: AugmentationKind,
    edges: Vec<(usize, usize)>,
) -> Augmentation {
    let mut c = f64::INFINITY;
    for (t, &(i, j)) in edges.iter().enumerate() {
        c = c.min(if t % 2 == 0 {
            1.0 - w[i][j]
        } else {
            w[i][j]
        });
    }
    let mut killed = Vec::new();
    for (t, &(i, j)) in edges.iter().enumerate() {
        let x = snap(if t % 2 == 0 { w[i][j] + c } else { w[i][j] - c });
        if !is_live(x) {
            killed.push((i, j));
        }
        w[i][j] = x;
    }
    Augmentation {
        kind,
        edges,
        c,
        killed,
    }
}

/// Live neighbors of a global vertex (`rows 0..n1`, `cols n1..n1+n2`),
/// ascending.
fn live_neighbors(w: &[Vec<f64>], n1: usize, n2: usize, v: usize) -> Vec<usize> {
    if v < n1 {
        (0..n2)
            .filter(|&j| is_live(w[v][j]))
            .map(|j| n1 + j)
            .collect()
    } else {
        (0..n1).filter(|&i| is_live(w[i][v - n1])).collect()
    }
}

fn as_edge(n1: usize, u: usize, v: usize) -> (usize, usize) {
    if u < n1 {
        (u, v - n1)
    } else {
        (v, u - n1)
    }
}

/// Finds one cycle in the live subgraph: DFS from the smallest vertex,
/// ascending neighbor order. Returns the cycle as an ordered edge list
/// starting at the cycle's smallest vertex, oriented toward its smaller
/// cycle-neighbor (deterministic).
fn find_live_cycle(w: &[Vec<f64>], n1: usize, n2: usize) -> Option<Vec<(usize, usize)>> {
    let n = n1 + n2;
    let mut visited = vec![false; n];
    for start in 0..n {
        if visited[start] || live_neighbors(w, n1, n2, start).is_empty() {
            continue;
        }
        let mut parent = vec![usize::MAX; n];
        let mut stack = vec![(start, usize::MAX)];
        while let Some((u, from)) = stack.pop() {
            if visited[u] {
                continue;
            }
            visited[u] = true;
            parent[u] = from;
            // push in descending order so the smallest neighbor is explored first
            for &x in live_neighbors(w, n1, n2, u).iter().rev() {
                if x == from {
                    continue;
                }
                if visited[x] {
                    // cycle: x -> ... -> u along parents, closed by (u, x)
                    let mut verts = vec![u];
                    let mut cur = u;
                    while cur != x {
                        cur = parent[cur];
                        verts.push(cur);
                    }
                    return Some(canonical_cycle_edges(n1, &verts));
                }
                stack.push((x, u));
            }
        }
    }
    None
}

/// Rotates/orients a cycle vertex list to start at its minimum vertex,
/// stepping first toward the smaller of that vertex's two cycle neighbors.
fn canonical_cycle_edges(n1: usize, verts: &[usize]) -> Vec<(usize, usize)> {
    let len = verts.len();
    let (pos, _) = verts
        .iter()
        .enumerate()
        .min_by_key(|&(_, &v)| v)
        .unwrap();
    let next = verts[(pos + 1) % len];
    let prev = verts[(pos + len - 1) % len];
    let mut ordered = Vec::with_capacity(len);
    if next <= prev {
        for t in 0..len {
            ordered.push(verts[(pos + t) % len]);
        }
    } else {
        for t in 0..len {
            ordered.push(verts[(pos + len - t) % len]);
        }
    }
    (0..len)
        .map(|t| as_edge(n1, ordered[t], ordered[(t + 1) % len]))
        .collect()
}

/// Finds one maximal live path once no live cycles remain (the live subgraph
/// is a forest): walk from the smallest live leaf, always taking the smallest
/// live neighbor other than the predecessor.
fn find_maximal_live_path(w: &[Vec<f64>], n1: usize, n2: usize) -> Option<Vec<(usize, usize)>> {
    let n = n1 + n2;
    let leaf = (0..n).find(|&v| live_neighbors(w, n1, n2, v).len() == 1)?;
    let mut verts = vec![leaf];
    let mut prev = usize::MAX;
    let mut cur = leaf;
    loop {
        let next = live_neighbors(w, n1, n2, cur)
            .into_iter()
            .find(|&x| x != prev);
        match next {
            Some(x) => {
                verts.push(x);
                prev = cur;
                cur = x;
            }
            None => break,
        }
    }
    Some(
        verts
            .windows(2)
            .map(|p| as_edge(n1, p[0], p[1]))
            .collect(),
    )
}

/// Builds the crossing weight matrix `w(i, j) = p_ij` between `a_set` and its
/// complement, rounds it, and maps the result back onto the original `n`
/// vertices. The output is the deterministic crossing graph of the
/// lower-bound pipeline.
pub fn build_crossing_tree(
    sol: &MaxEntropySolution,
    a_set: &[usize],
) -> Result<SimpleGraph, RoundingError> {
    let n = sol.n();
    let in_a: Vec<bool> = {
        let mut v = vec![false; n];
        for &i in a_set {
            v[i] = true;
        }
        v
    };
    let rows: Vec<usize> = (0..n).filter(|&i| in_a[i]).collect();
    let cols: Vec<usize> = (0..n).filter(|&i| !in_a[i]).collect();
    let mut wbg = WeightedBipartiteGraph::new(rows.len(), cols.len());
    for (ri, &i) in rows.iter().enumerate() {
        for (cj, &j) in cols.iter().enumerate() {
            wbg.set(ri, cj, sol.p_tilde(i, j))?;
        }
    }
    let (g, _) = round_to_integral(&wbg)?;
    let mut out = SimpleGraph::empty(n);
    for (u, v) in g.edges() {
        out.add_edge(rows[u], cols[v - rows.len()]).unwrap();
    }
    Ok(out)
}

/// Exact degree-guarantee verdict for a rounding output against the initial
/// fractional degrees.
pub fn degree_guarantee_holds(input: &WeightedBipartiteGraph, output: &SimpleGraph) -> bool {
    let n1 = input.n1();
    let check = |frac: f64, got: usize| {
        let floor = (frac + SNAP).floor() as usize;
        got == floor || got == floor + 1
    };
    (0..n1).all(|i| check(input.row_degree(i), output.degree(i)))
        && (0..input.n2()).all(|j| check(input.col_degree(j), output.degree(n1 + j)))
}

/// Convenience: the crossing graph for `A = I_alpha` (small-degree vertices).
pub fn crossing_tree_for_small_degrees(
    sol: &MaxEntropySolution,
    d: &DegreeSequence,
    alpha: f64,
) -> Result<SimpleGraph, RoundingError> {
    build_crossing_tree(sol, &d.small_degree_set(alpha))
}
