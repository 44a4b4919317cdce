//! Labeled trees, Prüfer codes, the B-function `psi`, wedge sums, and exact
//! weighted embedding sums `F(T, G)`.
//!
//! Tree vertices are 0-indexed `0..k`; placements map them injectively into
//! the ambient vertex set `0..n`.

use thiserror::Error;

use crate::degseq::DegreeSequence;
use crate::graphs::SimpleGraph;

#[derive(Debug, Error)]
pub enum TreeError {
    #[error("a tree needs at least 2 vertices, got {0}")]
    TooSmall(usize),
    #[error("edge list does not form a tree on {0} vertices")]
    NotATree(usize),
    #[error("enumerate_trees supports k <= {max}, got {k}")]
    SizeGuardK { k: usize, max: usize },
    #[error("embedding budget of {0} partial extensions exhausted")]
    SizeGuardBudget(u64),
    #[error("pruefer code entry {0} out of range for k = {1}")]
    MalformedCode(usize, usize),
    #[error("placement is not injective or out of range")]
    BadPlacement,
    #[error("ordered-tree images share no edge")]
    DisjointImages,
}

/// A labeled tree on vertices `0..k` with its degree vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabeledTree {
    k: usize,
    edges: Vec<(usize, usize)>,
    degrees: Vec<usize>,
}

impl LabeledTree {
    pub fn new(k: usize, mut edges: Vec<(usize, usize)>) -> Result<Self, TreeError> {
        if k < 2 {
            return Err(TreeError::TooSmall(k));
        }
        if edges.len() != k - 1 {
            return Err(TreeError::NotATree(k));
        }
        for e in edges.iter_mut() {
            if e.0 > e.1 {
                *e = (e.1, e.0);
            }
            if e.0 == e.1 || e.1 >= k {
                return Err(TreeError::NotATree(k));
            }
        }
        edges.sort_unstable();
        if edges.windows(2).any(|w| w[0] == w[1]) {
            return Err(TreeError::NotATree(k));
        }
        let mut degrees = vec![0usize; k];
        let mut adj = vec![Vec::new(); k];
        for &(u, v) in &edges {
            degrees[u] += 1;
            degrees[v] += 1;
            adj[u].push(v);
            adj[v].push(u);
        }
        // connectivity
        let mut seen = vec![false; k];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        if count != k {
            return Err(TreeError::NotATree(k));
        }
        Ok(Self { k, edges, degrees })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Tree-degree `b_u` of vertex `u`.
    pub fn tree_degree(&self, u: usize) -> usize {
        self.degrees[u]
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.k];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj
    }

    /// Vertices in BFS order from vertex 0 with each vertex's parent; the
    /// root's parent is itself. Used by the embedding backtracker.
    fn bfs_order(&self) -> Vec<(usize, usize)> {
        let adj = self.adjacency();
        let mut order = Vec::with_capacity(self.k);
        let mut seen = vec![false; self.k];
        let mut queue = std::collections::VecDeque::new();
        queue.push_back((0usize, 0usize));
        seen[0] = true;
        while let Some((u, parent)) = queue.pop_front() {
            order.push((u, parent));
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back((v, u));
                }
            }
        }
        order
    }

    /// Relabels vertices by `pi` (vertex `u` becomes `pi[u]`).
    pub fn relabel(&self, pi: &[usize]) -> Result<Self, TreeError> {
        let edges = self
            .edges
            .iter()
            .map(|&(u, v)| (pi[u], pi[v]))
            .collect();
        Self::new(self.k, edges)
    }
}

/// Prüfer code: `k - 2` entries in `0..k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrueferCode {
    pub entries: Vec<usize>,
}

/// Standard Prüfer encoding; the k = 2 tree has the empty code.
pub fn pruefer_encode(tree: &LabeledTree) -> PrueferCode {
    let k = tree.k();
    let mut degree = tree.degrees().to_vec();
    let adj: Vec<Vec<usize>> = tree.adjacency();
    let mut removed = vec![false; k];
    let mut entries = Vec::with_capacity(k.saturating_sub(2));
    for _ in 0..k.saturating_sub(2) {
        let leaf = (0..k)
            .find(|&v| !removed[v] && degree[v] == 1)
            .expect("a tree always has a leaf");
        let neighbor = *adj[leaf]
            .iter()
            .find(|&&v| !removed[v])
            .expect("leaf has a live neighbor");
        entries.push(neighbor);
        removed[leaf] = true;
        degree[leaf] -= 1;
        degree[neighbor] -= 1;
    }
    PrueferCode { entries }
}

/// Standard Prüfer decoding for a tree on `k` vertices.
pub fn pruefer_decode(k: usize, code: &PrueferCode) -> Result<LabeledTree, TreeError> {
    if k < 2 {
        return Err(TreeError::TooSmall(k));
    }
    if code.entries.len() != k - 2 {
        return Err(TreeError::NotATree(k));
    }
    for &c in &code.entries {
        if c >= k {
            return Err(TreeError::MalformedCode(c, k));
        }
    }
    let mut degree = vec![1usize; k];
    for &c in &code.entries {
        degree[c] += 1;
    }
    let mut edges = Vec::with_capacity(k - 1);
    let mut degree_now = degree.clone();
    for &c in &code.entries {
        let leaf = (0..k).find(|&v| degree_now[v] == 1).unwrap();
        edges.push((leaf, c));
        degree_now[leaf] = 0;
        degree_now[c] -= 1;
    }
    let last: Vec<usize> = (0..k).filter(|&v| degree_now[v] == 1).collect();
    edges.push((last[0], last[1]));
    LabeledTree::new(k, edges)
}

pub const ENUMERATE_MAX_K: usize = 9;

/// All `k^{k-2}` labeled trees on `k` vertices, via all Prüfer codes.
pub fn enumerate_trees(k: usize) -> Result<Vec<LabeledTree>, TreeError> {
    if k < 2 {
        return Err(TreeError::TooSmall(k));
    }
    if k > ENUMERATE_MAX_K {
        return Err(TreeError::SizeGuardK {
            k,
            max: ENUMERATE_MAX_K,
        });
    }
    let len = k - 2;
    let count = (k as u64).pow(len as u32);
    let mut out = Vec::with_capacity(count as usize);
    for idx in 0..count {
        let mut entries = Vec::with_capacity(len);
        let mut rem = idx;
        for _ in 0..len {
            entries.push((rem % k as u64) as usize);
            rem /= k as u64;
        }
        out.push(pruefer_decode(k, &PrueferCode { entries })?);
    }
    Ok(out)
}

/// A labeled tree with an injective placement into the ambient vertex set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderedTree {
    tree: LabeledTree,
    placement: Vec<usize>,
}

impl OrderedTree {
    pub fn new(tree: LabeledTree, placement: Vec<usize>) -> Result<Self, TreeError> {
        if placement.len() != tree.k() {
            return Err(TreeError::BadPlacement);
        }
        let mut sorted = placement.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(TreeError::BadPlacement);
        }
        Ok(Self { tree, placement })
    }

    pub fn tree(&self) -> &LabeledTree {
        &self.tree
    }

    pub fn placement(&self) -> &[usize] {
        &self.placement
    }

    /// Image edges `(s(u), s(v))` normalized with smaller endpoint first.
    pub fn image_edges(&self) -> Vec<(usize, usize)> {
        self.tree
            .edges()
            .iter()
            .map(|&(u, v)| {
                let (a, b) = (self.placement[u], self.placement[v]);
                if a < b {
                    (a, b)
                } else {
                    (b, a)
                }
            })
            .collect()
    }

    pub fn image_vertices(&self) -> Vec<usize> {
        let mut v = self.placement.clone();
        v.sort_unstable();
        v
    }
}

const LOG_SPACE_THRESHOLD: f64 = 500.0;

/// The B-function `psi(s, T, D) = prod_u d_{s(u)}^{b_u - 1}`.
pub fn psi(ot: &OrderedTree, d: &DegreeSequence) -> f64 {
    let k = ot.tree().k() as f64;
    let dmax = d.max_degree() as f64;
    if k * dmax.max(2.0).ln() > LOG_SPACE_THRESHOLD {
        return log_psi(ot, d).exp();
    }
    ot.placement()
        .iter()
        .enumerate()
        .map(|(u, &su)| (d.degree(su) as f64).powi(ot.tree().tree_degree(u) as i32 - 1))
        .product()
}

/// `log psi`, always finite since all degrees are >= 1.
pub fn log_psi(ot: &OrderedTree, d: &DegreeSequence) -> f64 {
    ot.placement()
        .iter()
        .enumerate()
        .map(|(u, &su)| {
            (ot.tree().tree_degree(u) as f64 - 1.0) * (d.degree(su) as f64).ln()
        })
        .sum()
}

/// Checks `psi(s . pi^{-1}, pi . T, D) == psi(s, T, D)` exactly.
pub fn psi_invariance_check(
    ot: &OrderedTree,
    pi: &[usize],
    d: &DegreeSequence,
) -> Result<bool, TreeError> {
    let k = ot.tree().k();
    if pi.len() != k {
        return Err(TreeError::BadPlacement);
    }
    let relabeled = ot.tree().relabel(pi)?;
    // s' = s . pi^{-1}: vertex pi[u] of the new tree is placed where u was
    let mut placement = vec![0usize; k];
    for u in 0..k {
        placement[pi[u]] = ot.placement()[u];
    }
    let other = OrderedTree::new(relabeled, placement)?;
    Ok(psi(&other, d) == psi(ot, d))
}

/// Wedge sum of two ordered trees with overlapping edge images.
///
/// Construction: fix the lexicographically smallest common image edge `e`;
/// for every shared image vertex not incident to a common edge (ascending
/// order), delete the first edge of its path to `e` inside the second tree's
/// image; then break remaining cycles by deleting the lexicographically
/// smallest eligible edge from `E(s2(T2)) \ E(s1(T1))`.
pub fn wedge_sum(a: &OrderedTree, b: &OrderedTree) -> Result<OrderedTree, TreeError> {
    let e1: Vec<(usize, usize)> = a.image_edges();
    let e2: Vec<(usize, usize)> = b.image_edges();
    let mut common: Vec<(usize, usize)> = e1
        .iter()
        .filter(|e| e2.contains(e))
        .copied()
        .collect();
    if common.is_empty() {
        return Err(TreeError::DisjointImages);
    }
    common.sort_unstable();
    let anchor = common[0];

    let mut union_edges: Vec<(usize, usize)> = e1.clone();
    for &e in &e2 {
        if !union_edges.contains(&e) {
            union_edges.push(e);
        }
    }
    union_edges.sort_unstable();

    let v1 = a.image_vertices();
    let v2 = b.image_vertices();
    let shared: Vec<usize> = v1.iter().filter(|v| v2.contains(v)).copied().collect();

    let incident_to_common = |v: usize| common.iter().any(|&(x, y)| x == v || y == v);

    // Path from v to the anchor edge inside the second tree's image; returns
    // its first edge.
    let first_edge_of_path = |v: usize| -> (usize, usize) {
        let mut adj: std::collections::HashMap<usize, Vec<usize>> = Default::default();
        for &(x, y) in &e2 {
            adj.entry(x).or_default().push(y);
            adj.entry(y).or_default().push(x);
        }
        // BFS from v until we reach an endpoint of the anchor
        let mut parent: std::collections::HashMap<usize, usize> = Default::default();
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(v);
        parent.insert(v, v);
        let mut hit = None;
        while let Some(u) = queue.pop_front() {
            if u != v && (u == anchor.0 || u == anchor.1) {
                hit = Some(u);
                break;
            }
            if let Some(ns) = adj.get(&u) {
                let mut ns = ns.clone();
                ns.sort_unstable();
                for w in ns {
                    if !parent.contains_key(&w) {
                        parent.insert(w, u);
                        queue.push_back(w);
                    }
                }
            }
        }
        let mut cur = hit.expect("second image is connected and contains the anchor");
        // walk back to v; the last step before v is the first edge of the path
        while parent[&cur] != v {
            cur = parent[&cur];
        }
        let (x, y) = (v, cur);
        if x < y {
            (x, y)
        } else {
            (y, x)
        }
    };

    let mut working: Vec<(usize, usize)> = union_edges.clone();
    for &v in &shared {
        if !incident_to_common(v) {
            let kill = first_edge_of_path(v);
            working.retain(|&e| e != kill);
        }
    }

    // break remaining cycles: delete the lexicographically smallest cycle edge
    // from E(s2) \ E(s1)
    loop {
        let cycle = find_cycle(&working);
        let Some(cycle_edges) = cycle else { break };
        let kill = cycle_edges
            .iter()
            .filter(|e| e2.contains(e) && !e1.contains(e))
            .min()
            .copied()
            .expect("every surviving cycle crosses E(s2) \\ E(s1)");
        working.retain(|&e| e != kill);
    }

    // collect vertices of the union, ascending: they define s3
    let mut verts: Vec<usize> = v1;
    for v in v2 {
        if !verts.contains(&v) {
            verts.push(v);
        }
    }
    verts.sort_unstable();
    let index_of = |v: usize| verts.binary_search(&v).unwrap();
    let tree_edges: Vec<(usize, usize)> = working
        .iter()
        .map(|&(x, y)| (index_of(x), index_of(y)))
        .collect();
    let tree = LabeledTree::new(verts.len(), tree_edges)?;
    OrderedTree::new(tree, verts)
}

/// Finds one cycle in an undirected edge list; returns its edges, or None.
fn find_cycle(edges: &[(usize, usize)]) -> Option<Vec<(usize, usize)>> {
    let mut adj: std::collections::HashMap<usize, Vec<usize>> = Default::default();
    for &(x, y) in edges {
        adj.entry(x).or_default().push(y);
        adj.entry(y).or_default().push(x);
    }
    let mut verts: Vec<usize> = adj.keys().copied().collect();
    verts.sort_unstable();
    let mut visited: std::collections::HashSet<usize> = Default::default();
    for &start in &verts {
        if visited.contains(&start) {
            continue;
        }
        // DFS with parent edges
        let mut parent: std::collections::HashMap<usize, usize> = Default::default();
        let mut stack = vec![(start, usize::MAX)];
        while let Some((u, from)) = stack.pop() {
            if visited.contains(&u) {
                continue;
            }
            visited.insert(u);
            if from != usize::MAX {
                parent.insert(u, from);
            }
            let mut ns = adj[&u].clone();
            ns.sort_unstable();
            for w in ns {
                if w == from {
                    continue;
                }
                if visited.contains(&w) {
                    // found a cycle: path u -> ... -> w plus edge (u, w)
                    let mut path = vec![u];
                    let mut cur = u;
                    while cur != w {
                        cur = *parent.get(&cur)?;
                        path.push(cur);
                    }
                    let mut cycle = Vec::new();
                    for pair in path.windows(2) {
                        let (x, y) = (pair[0], pair[1]);
                        cycle.push(if x < y { (x, y) } else { (y, x) });
                    }
                    let (x, y) = (u, w);
                    cycle.push(if x < y { (x, y) } else { (y, x) });
                    return Some(cycle);
                }
                stack.push((w, u));
            }
        }
    }
    None
}

pub const DEFAULT_EMBEDDING_BUDGET: u64 = 100_000_000;

/// Exact weighted embedding sum
/// `F(T, G) = sum over injective placements s with all tree edges in G of 1/psi(s, T, D)`.
///
/// Backtracks over tree vertices in BFS order from vertex 0, so every new
/// vertex extends along an edge of `G` from its already-placed parent.
pub fn weighted_embedding_sum(
    tree: &LabeledTree,
    g: &SimpleGraph,
    degrees_for_psi: &DegreeSequence,
    budget: u64,
) -> Result<f64, TreeError> {
    assert_eq!(g.n(), degrees_for_psi.n());
    let order = tree.bfs_order();
    let weight_of = |tree_vertex: usize, ambient: usize| -> f64 {
        (degrees_for_psi.degree(ambient) as f64)
            .powi(tree.tree_degree(tree_vertex) as i32 - 1)
            .recip()
    };
    let mut used = vec![false; g.n()];
    let mut total = 0.0;
    let mut spent = 0u64;
    backtrack_sum(
        g,
        &order,
        0,
        &mut vec![usize::MAX; tree.k()],
        &mut used,
        1.0,
        &weight_of,
        &mut total,
        &mut spent,
        budget,
    )?;
    Ok(total)
}

#[allow(clippy::too_many_arguments)]
fn backtrack_sum(
    g: &SimpleGraph,
    order: &[(usize, usize)],
    depth: usize,
    placed: &mut Vec<usize>,
    used: &mut Vec<bool>,
    partial: f64,
    weight_of: &dyn Fn(usize, usize) -> f64,
    total: &mut f64,
    spent: &mut u64,
    budget: u64,
) -> Result<(), TreeError> {
    if depth == order.len() {
        *total += partial;
        return Ok(());
    }
    let (v, parent) = order[depth];
    let candidates: Vec<usize> = if depth == 0 {
        (0..g.n()).collect()
    } else {
        g.neighbors(placed[parent]).to_vec()
    };
    for c in candidates {
        if used[c] {
            continue;
        }
        *spent += 1;
        if *spent > budget {
            return Err(TreeError::SizeGuardBudget(budget));
        }
        used[c] = true;
        placed[v] = c;
        backtrack_sum(
            g,
            order,
            depth + 1,
            placed,
            used,
            partial * weight_of(v, c),
            weight_of,
            total,
            spent,
            budget,
        )?;
        used[c] = false;
        placed[v] = usize::MAX;
    }
    Ok(())
}

/// `Z_k`: sum over embeddings of the absolute difference between the inverse
/// B-products under `D_ref` and under the actual degrees of `G`.
pub fn z_discrepancy(
    tree: &LabeledTree,
    g: &SimpleGraph,
    d_ref: &DegreeSequence,
    budget: u64,
) -> Result<f64, TreeError> {
    assert_eq!(g.n(), d_ref.n());
    let order = tree.bfs_order();
    let mut used = vec![false; g.n()];
    let mut total = 0.0;
    let mut spent = 0u64;
    // carry both partial products
    fn recurse(
        g: &SimpleGraph,
        tree: &LabeledTree,
        d_ref: &DegreeSequence,
        order: &[(usize, usize)],
        depth: usize,
        placed: &mut Vec<usize>,
        used: &mut Vec<bool>,
        p_ref: f64,
        p_actual: f64,
        total: &mut f64,
        spent: &mut u64,
        budget: u64,
    ) -> Result<(), TreeError> {
        if depth == order.len() {
            *total += (p_ref - p_actual).abs();
            return Ok(());
        }
        let (v, parent) = order[depth];
        let candidates: Vec<usize> = if depth == 0 {
            (0..g.n()).collect()
        } else {
            g.neighbors(placed[parent]).to_vec()
        };
        let exponent = tree.tree_degree(v) as i32 - 1;
        for c in candidates {
            if used[c] {
                continue;
            }
            *spent += 1;
            if *spent > budget {
                return Err(TreeError::SizeGuardBudget(budget));
            }
            used[c] = true;
            placed[v] = c;
            recurse(
                g,
                tree,
                d_ref,
                order,
                depth + 1,
                placed,
                used,
                p_ref / (d_ref.degree(c) as f64).powi(exponent),
                p_actual / (g.degree(c) as f64).powi(exponent),
                total,
                spent,
                budget,
            )?;
            used[c] = false;
        }
        Ok(())
    }
    recurse(
        g,
        tree,
        d_ref,
        &order,
        0,
        &mut vec![usize::MAX; tree.k()],
        &mut used,
        1.0,
        1.0,
        &mut total,
        &mut spent,
        budget,
    )?;
    Ok(total)
}

pub const TOTAL_MAX_K: usize = 6;

/// `(1/M) sum over all labeled k-trees T of F(T, G)` with `psi` from `D(G)`.
pub fn normalized_tree_total(g: &SimpleGraph, k: usize, budget: u64) -> Result<f64, TreeError> {
    if k > TOTAL_MAX_K {
        return Err(TreeError::SizeGuardK {
            k,
            max: TOTAL_MAX_K,
        });
    }
    let d = DegreeSequence::new(g.degrees()).map_err(|_| TreeError::BadPlacement)?;
    // DegreeSequence sorts; rebuild a lookup in graph vertex order instead
    let _ = d;
    let degrees = GraphDegrees::of(g);
    let mut sum = 0.0;
    for tree in enumerate_trees(k)? {
        sum += weighted_embedding_sum_with(&tree, g, &degrees, budget)?;
    }
    let m: usize = g.degrees().iter().map(|&x| x as usize).sum();
    Ok(sum / m as f64)
}

/// Degree lookup in graph vertex order (not sorted), for B-weights taken from
/// the graph itself.
struct GraphDegrees {
    d: Vec<f64>,
}

impl GraphDegrees {
    fn of(g: &SimpleGraph) -> Self {
        Self {
            d: (0..g.n()).map(|v| g.degree(v) as f64).collect(),
        }
    }
}

fn weighted_embedding_sum_with(
    tree: &LabeledTree,
    g: &SimpleGraph,
    degrees: &GraphDegrees,
    budget: u64,
) -> Result<f64, TreeError> {
    let order = tree.bfs_order();
    let weight_of = |tree_vertex: usize, ambient: usize| -> f64 {
        degrees.d[ambient]
            .powi(tree.tree_degree(tree_vertex) as i32 - 1)
            .recip()
    };
    let mut used = vec![false; g.n()];
    let mut total = 0.0;
    let mut spent = 0u64;
    backtrack_sum(
        g,
        &order,
        0,
        &mut vec![usize::MAX; tree.k()],
        &mut used,
        1.0,
        &weight_of,
        &mut total,
        &mut spent,
        budget,
    )?;
    Ok(total)
}

/// `F(T, G)` with B-weights from the degrees of `G` itself.
pub fn weighted_embedding_sum_self(
    tree: &LabeledTree,
    g: &SimpleGraph,
    budget: u64,
) -> Result<f64, TreeError> {
    weighted_embedding_sum_with(tree, g, &GraphDegrees::of(g), budget)
}

/// True iff every placed edge of the ordered tree crosses the bipartition.
pub fn bipartite_admissible(ot: &OrderedTree, part_of: &[u8]) -> bool {
    ot.image_edges()
        .iter()
        .all(|&(x, y)| part_of[x] != part_of[y])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::seq::SliceRandom as _;
    use rand::{Rng as _, SeedableRng as _};

    fn ds(v: &[u64]) -> DegreeSequence {
        DegreeSequence::new(v.to_vec()).unwrap()
    }

    fn path3() -> LabeledTree {
        LabeledTree::new(3, vec![(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn cayley_counts() {
        for (k, expected) in [(2usize, 1usize), (3, 3), (4, 16), (5, 125), (6, 1296), (7, 16807)] {
            let trees = enumerate_trees(k).unwrap();
            assert_eq!(trees.len(), expected, "k = {k}");
            let distinct: std::collections::HashSet<_> =
                trees.iter().map(|t| t.edges().to_vec()).collect();
            assert_eq!(distinct.len(), expected);
        }
        assert!(matches!(
            enumerate_trees(10),
            Err(TreeError::SizeGuardK { .. })
        ));
    }

    #[test]
    fn pruefer_k2_and_k3() {
        assert!(pruefer_encode(&LabeledTree::new(2, vec![(0, 1)]).unwrap())
            .entries
            .is_empty());
        let trees = enumerate_trees(3).unwrap();
        let codes: std::collections::HashSet<Vec<usize>> =
            trees.iter().map(|t| pruefer_encode(t).entries).collect();
        assert_eq!(codes, [vec![0], vec![1], vec![2]].into_iter().collect());
    }

    #[test]
    fn pruefer_round_trip_random_codes() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..1000 {
            let k = rng.gen_range(4..=9);
            let entries: Vec<usize> = (0..k - 2).map(|_| rng.gen_range(0..k)).collect();
            let code = PrueferCode { entries };
            let tree = pruefer_decode(k, &code).unwrap();
            assert_eq!(pruefer_encode(&tree), code);
        }
    }

    proptest! {
        #[test]
        fn pruefer_round_trip_prop(k in 3usize..=8, seed in 0u64..1000) {
            let mut rng = StdRng::seed_from_u64(seed);
            let entries: Vec<usize> = (0..k - 2).map(|_| rng.gen_range(0..k)).collect();
            let code = PrueferCode { entries };
            let tree = pruefer_decode(k, &code).unwrap();
            prop_assert_eq!(pruefer_encode(&tree), code);
        }
    }

    #[test]
    fn psi_figure_instance() {
        // D = (3,1,2,1,3,3,4,3); path on 3 vertices placed with the center at
        // the degree-4 vertex and the ends at degree-3 vertices
        let d = DegreeSequence::new(vec![3, 1, 2, 1, 3, 3, 4, 3]).unwrap();
        // locate original vertices 8, 7, 5 (1-indexed) in sorted order
        let find = |orig: usize| (0..d.n()).find(|&i| d.original_index(i) == orig).unwrap();
        let placement = vec![find(7), find(6), find(4)]; // originals 8, 7, 5 (0-indexed)
        let ot = OrderedTree::new(path3(), placement).unwrap();
        // psi = d_center^(2-1) = 4; the exponents b_u - 1 sum to k - 2 = 1
        assert_eq!(psi(&ot, &d), 4.0);
    }

    #[test]
    fn psi_edge_is_one_and_path_is_middle_degree() {
        let d = ds(&[2, 3, 5, 7]);
        let edge = LabeledTree::new(2, vec![(0, 1)]).unwrap();
        let ot = OrderedTree::new(edge, vec![0, 3]).unwrap();
        assert_eq!(psi(&ot, &d), 1.0);
        let ot = OrderedTree::new(path3(), vec![0, 2, 1]).unwrap();
        assert_eq!(psi(&ot, &d), d.degree(2) as f64);
    }

    #[test]
    fn psi_invariance() {
        let d = DegreeSequence::new(vec![3, 1, 2, 1, 3, 3, 4, 3]).unwrap();
        let ot = OrderedTree::new(path3(), vec![7, 6, 4]).unwrap();
        assert!(psi_invariance_check(&ot, &[0, 1, 2], &d).unwrap());
        for pi in [[0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
            assert!(psi_invariance_check(&ot, &pi, &d).unwrap());
        }
    }

    #[test]
    fn psi_invariance_random() {
        let mut rng = StdRng::seed_from_u64(23);
        let n = 12;
        let degs: Vec<u64> = (0..n).map(|_| rng.gen_range(1..9)).collect();
        let d = DegreeSequence::new(degs).unwrap();
        for _ in 0..1000 {
            let k = rng.gen_range(2..=6);
            let trees = enumerate_trees(k).unwrap();
            let tree = trees[rng.gen_range(0..trees.len())].clone();
            let mut verts: Vec<usize> = (0..n).collect();
            verts.shuffle(&mut rng);
            let ot = OrderedTree::new(tree, verts[..k].to_vec()).unwrap();
            let mut pi: Vec<usize> = (0..k).collect();
            pi.shuffle(&mut rng);
            assert!(psi_invariance_check(&ot, &pi, &d).unwrap());
        }
    }

    #[test]
    fn wedge_sum_identical_inputs() {
        let ot = OrderedTree::new(path3(), vec![2, 5, 7]).unwrap();
        let w = wedge_sum(&ot, &ot).unwrap();
        assert_eq!(w.image_edges(), ot.image_edges());
    }

    #[test]
    fn wedge_sum_single_shared_edge() {
        let e = LabeledTree::new(2, vec![(0, 1)]).unwrap();
        let a = OrderedTree::new(e.clone(), vec![1, 4]).unwrap();
        let b = OrderedTree::new(e, vec![4, 1]).unwrap();
        let w = wedge_sum(&a, &b).unwrap();
        assert_eq!(w.image_edges(), vec![(1, 4)]);
    }

    #[test]
    fn wedge_sum_triangle_union() {
        // two 2-edge paths sharing edge (0,1); union closes a triangle
        let a = OrderedTree::new(path3(), vec![0, 1, 2]).unwrap(); // edges (0,1),(1,2)
        let b = OrderedTree::new(path3(), vec![1, 0, 2]).unwrap(); // edges (0,1),(0,2)
        let w = wedge_sum(&a, &b).unwrap();
        let edges = w.image_edges();
        assert_eq!(edges.len(), 2); // 3 vertices, tree
        assert!(edges.contains(&(0, 1))); // the common edge survives
    }

    #[test]
    fn wedge_disjoint_images_rejected() {
        let e = LabeledTree::new(2, vec![(0, 1)]).unwrap();
        let a = OrderedTree::new(e.clone(), vec![0, 1]).unwrap();
        let b = OrderedTree::new(e, vec![2, 3]).unwrap();
        assert!(matches!(wedge_sum(&a, &b), Err(TreeError::DisjointImages)));
    }

    #[test]
    fn wedge_output_is_tree_and_submultiplicative() {
        let mut rng = StdRng::seed_from_u64(31);
        let n = 8;
        let degs: Vec<u64> = (0..n).map(|_| rng.gen_range(1..7)).collect();
        let d = DegreeSequence::new(degs).unwrap();
        let mut tried = 0;
        while tried < 300 {
            let k1 = rng.gen_range(2..=4);
            let k2 = rng.gen_range(2..=4);
            let t1s = enumerate_trees(k1).unwrap();
            let t2s = enumerate_trees(k2).unwrap();
            let t1 = t1s[rng.gen_range(0..t1s.len())].clone();
            let t2 = t2s[rng.gen_range(0..t2s.len())].clone();
            let mut verts: Vec<usize> = (0..n).collect();
            verts.shuffle(&mut rng);
            let a = OrderedTree::new(t1, verts[..k1].to_vec()).unwrap();
            verts.shuffle(&mut rng);
            let b = OrderedTree::new(t2, verts[..k2].to_vec()).unwrap();
            let Ok(w) = wedge_sum(&a, &b) else { continue };
            tried += 1;
            let k3 = w.tree().k();
            assert_eq!(w.image_edges().len(), k3 - 1);
            // vertex set is the union
            let mut expect: Vec<usize> = a.image_vertices();
            for v in b.image_vertices() {
                if !expect.contains(&v) {
                    expect.push(v);
                }
            }
            expect.sort_unstable();
            assert_eq!(w.image_vertices(), expect);
            // edge set within the union of images
            let mut allowed = a.image_edges();
            allowed.extend(b.image_edges());
            for e in w.image_edges() {
                assert!(allowed.contains(&e));
            }
            // psi submultiplicativity
            let lhs = psi(&w, &d);
            let rhs = psi(&a, &d) * psi(&b, &d);
            assert!(lhs <= rhs * (1.0 + 1e-12), "psi {lhs} > {rhs}");
        }
    }

    #[test]
    fn f_single_edge_is_m() {
        let d = ds(&[2, 2, 2, 2]);
        let g = d.havel_hakimi().unwrap();
        let edge = LabeledTree::new(2, vec![(0, 1)]).unwrap();
        let f = weighted_embedding_sum_self(&edge, &g, 1 << 30).unwrap();
        assert_eq!(f, 8.0);
    }

    #[test]
    fn f_path3_on_triangle() {
        let g = SimpleGraph::from_edges(3, &[(0, 1), (0, 2), (1, 2)]).unwrap();
        let f = weighted_embedding_sum_self(&path3(), &g, 1 << 30).unwrap();
        assert!((f - 3.0).abs() < 1e-12); // 6 placements, each weight 1/2
    }

    /// Brute force F over all injective maps.
    fn f_brute(tree: &LabeledTree, g: &SimpleGraph) -> f64 {
        let k = tree.k();
        let n = g.n();
        let mut total = 0.0;
        let mut placement = vec![0usize; k];
        fn rec(
            depth: usize,
            tree: &LabeledTree,
            g: &SimpleGraph,
            placement: &mut Vec<usize>,
            total: &mut f64,
        ) {
            let k = tree.k();
            if depth == k {
                if tree
                    .edges()
                    .iter()
                    .all(|&(u, v)| g.has_edge(placement[u], placement[v]))
                {
                    let w: f64 = (0..k)
                        .map(|u| {
                            (g.degree(placement[u]) as f64)
                                .powi(tree.tree_degree(u) as i32 - 1)
                                .recip()
                        })
                        .product();
                    *total += w;
                }
                return;
            }
            for c in 0..g.n() {
                if placement[..depth].contains(&c) {
                    continue;
                }
                placement[depth] = c;
                rec(depth + 1, tree, g, placement, total);
            }
        }
        let _ = n;
        rec(0, tree, g, &mut placement, &mut total);
        total
    }

    #[test]
    fn backtracking_matches_brute_force() {
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..20 {
            let n = rng.gen_range(4..=8);
            let p = rng.gen_range(0.3..0.8);
            let mut g = SimpleGraph::empty(n);
            for i in 0..n {
                for j in (i + 1)..n {
                    if rng.gen_bool(p) {
                        g.add_edge(i, j).unwrap();
                    }
                }
            }
            if g.degrees().iter().any(|&d| d == 0) {
                continue;
            }
            for k in 2..=4 {
                let trees = enumerate_trees(k).unwrap();
                let tree = &trees[rng.gen_range(0..trees.len())];
                let fast = weighted_embedding_sum_self(tree, &g, 1 << 30).unwrap();
                let brute = f_brute(tree, &g);
                assert!((fast - brute).abs() < 1e-9, "fast {fast} brute {brute}");
            }
        }
    }

    #[test]
    fn z_discrepancy_examples() {
        let g = SimpleGraph::from_edges(3, &[(0, 1), (0, 2), (1, 2)]).unwrap();
        let same = ds(&[2, 2, 2]);
        assert_eq!(z_discrepancy(&path3(), &g, &same, 1 << 30).unwrap(), 0.0);
        // D_ref = (2,2,3): only the sorted-last vertex's factor differs
        let dref = ds(&[2, 2, 3]);
        let z = z_discrepancy(&path3(), &g, &dref, 1 << 30).unwrap();
        assert!((z - 1.0 / 3.0).abs() < 1e-12, "z = {z}");
    }

    #[test]
    fn normalized_total_k2_is_one() {
        let d = ds(&[1, 2, 2, 3, 3, 3]);
        let g = d.havel_hakimi().unwrap();
        let v = normalized_tree_total(&g, 2, 1 << 30).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn normalized_total_k3_triangle() {
        let g = SimpleGraph::from_edges(3, &[(0, 1), (0, 2), (1, 2)]).unwrap();
        let v = normalized_tree_total(&g, 3, 1 << 30).unwrap();
        assert!((v - 1.5).abs() < 1e-12);
    }

    #[test]
    fn f_bounds_hold() {
        let mut rng = StdRng::seed_from_u64(9);
        for _ in 0..10 {
            let n = rng.gen_range(5..=10);
            let p = rng.gen_range(0.4..0.8);
            let mut g = SimpleGraph::empty(n);
            for i in 0..n {
                for j in (i + 1)..n {
                    if rng.gen_bool(p) {
                        g.add_edge(i, j).unwrap();
                    }
                }
            }
            if g.degrees().iter().any(|&d| d == 0) {
                continue;
            }
            let m = 2.0 * g.edge_count() as f64;
            for k in 2..=4 {
                for tree in enumerate_trees(k).unwrap() {
                    let f = weighted_embedding_sum_self(&tree, &g, 1 << 30).unwrap();
                    let lower = m - (n * k * (k - 1)) as f64 / 2.0;
                    assert!(f <= m + 1e-9);
                    assert!(f >= lower - 1e-9);
                }
            }
        }
    }

    #[test]
    fn bipartite_admissible_examples() {
        let part = vec![0u8, 0, 1, 1];
        let e = LabeledTree::new(2, vec![(0, 1)]).unwrap();
        let crossing = OrderedTree::new(e.clone(), vec![0, 2]).unwrap();
        assert!(bipartite_admissible(&crossing, &part));
        let inside = OrderedTree::new(e, vec![0, 1]).unwrap();
        assert!(!bipartite_admissible(&inside, &part));
        // alternating 3-path crosses; one-sided does not (needs a part of size 3)
        let part3 = vec![0u8, 0, 0, 1, 1];
        let alt = OrderedTree::new(path3(), vec![0, 3, 1]).unwrap();
        assert!(bipartite_admissible(&alt, &part3));
        let one_side = OrderedTree::new(path3(), vec![0, 1, 2]).unwrap();
        assert!(!bipartite_admissible(&one_side, &part3));
    }

    #[test]
    fn budget_guard_fires() {
        let d = ds(&[3, 3, 3, 3]);
        let g = d.havel_hakimi().unwrap();
        let tree = enumerate_trees(4).unwrap()[0].clone();
        assert!(matches!(
            weighted_embedding_sum_self(&tree, &g, 2),
            Err(TreeError::SizeGuardBudget(2))
        ));
    }
}
