//! Degree sequences and the combinatorial conditions imposed on them.
//!
//! A [`DegreeSequence`] stores positive vertex degrees sorted non-decreasing,
//! together with the permutation back to the caller's original vertex order.
//! All classification operations (Erdős–Gallai, type-(ε,ν), dense conditions)
//! work on the sorted representation.

use serde::Serialize;
use thiserror::Error;

use crate::graphs::SimpleGraph;

#[derive(Debug, Error)]
pub enum DegseqError {
    #[error("degree sequence must be non-empty")]
    Empty,
    #[error("degree at input position {0} is zero; all degrees must be >= 1")]
    ZeroDegree(usize),
    #[error("no k in [1, n] satisfies S_k <= M/2")]
    NoFeasibleK,
    #[error("index k = {k} out of range 1..={n}")]
    IndexOutOfRange { k: usize, n: usize },
    #[error("degree sequence is not graphical")]
    Infeasible,
}

/// Sorted positive integer degrees `d_1 <= ... <= d_n` with total `M`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeSequence {
    degrees: Vec<u64>,
    /// `original_order[i]` is the input position of sorted entry `i`.
    original_order: Vec<usize>,
    total: u64,
}

impl DegreeSequence {
    /// Builds a degree sequence from degrees in any order. Degrees must all be
    /// positive; the input permutation is retained for reporting.
    pub fn new(input: Vec<u64>) -> Result<Self, DegseqError> {
        if input.is_empty() {
            return Err(DegseqError::Empty);
        }
        for (i, &d) in input.iter().enumerate() {
            if d == 0 {
                return Err(DegseqError::ZeroDegree(i));
            }
        }
        let mut order: Vec<usize> = (0..input.len()).collect();
        order.sort_by_key(|&i| input[i]);
        let degrees: Vec<u64> = order.iter().map(|&i| input[i]).collect();
        let total = degrees.iter().sum();
        Ok(Self {
            degrees,
            original_order: order,
            total,
        })
    }

    pub fn n(&self) -> usize {
        self.degrees.len()
    }

    /// Total degree `M`.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Sorted degrees, non-decreasing.
    pub fn degrees(&self) -> &[u64] {
        &self.degrees
    }

    /// Degree of sorted vertex `i` (0-indexed).
    pub fn degree(&self, i: usize) -> u64 {
        self.degrees[i]
    }

    /// Input position of sorted vertex `i`.
    pub fn original_index(&self, i: usize) -> usize {
        self.original_order[i]
    }

    pub fn max_degree(&self) -> u64 {
        *self.degrees.last().unwrap()
    }

    /// Evaluates the Erdős–Gallai margins for every `k` and both the strict
    /// and non-strict verdicts. Parity of `M` is reported, not enforced.
    pub fn check_erdos_gallai(&self) -> EGReport {
        let n = self.n();
        // prefix[i] = sum of the i smallest degrees
        let mut prefix = vec![0u64; n + 1];
        for i in 0..n {
            prefix[i + 1] = prefix[i] + self.degrees[i];
        }
        let mut margins = Vec::with_capacity(n);
        let mut strict_pass = true;
        let mut nonstrict_pass = true;
        for k in 1..=n {
            let lhs = prefix[n] - prefix[n - k];
            // sum over the n-k smallest degrees of min(k, d_i)
            let cut = self.degrees[..n - k].partition_point(|&d| d <= k as u64);
            let small = prefix[cut];
            let capped = (k as u64) * ((n - k - cut) as u64);
            let rhs = (k as u64) * (k as u64 - 1) + small + capped;
            if lhs >= rhs {
                strict_pass = false;
            }
            if lhs > rhs {
                nonstrict_pass = false;
            }
            margins.push((lhs, rhs));
        }
        EGReport {
            strict_pass,
            nonstrict_pass,
            m_even: self.total % 2 == 0,
            margins,
        }
    }

    /// `S_k`: the sum of the `d_k` largest entries (1-indexed `k`), capped at `n`.
    pub fn s_k(&self, k: usize) -> Result<u64, DegseqError> {
        let n = self.n();
        if k == 0 || k > n {
            return Err(DegseqError::IndexOutOfRange { k, n });
        }
        let t = (self.degrees[k - 1] as usize).min(n);
        Ok(self.degrees[n - t..].iter().sum())
    }

    /// `ell(D) = max{k in [n] : S_k <= M/2}`.
    pub fn ell(&self) -> Result<usize, DegseqError> {
        let mut best = None;
        for k in 1..=self.n() {
            if 2 * self.s_k(k)? <= self.total {
                best = Some(k);
            }
        }
        best.ok_or(DegseqError::NoFeasibleK)
    }

    /// Evaluates the four conditions of the type-(ε,ν) assumption.
    pub fn classify_type(&self, epsilon: f64, nu: f64) -> Result<TypeClassification, DegseqError> {
        assert!(epsilon > 0.0 && nu > 0.0, "epsilon and nu must be positive");
        let n = self.n() as f64;
        let m = self.total as f64;
        let is_strict_graphic = self.check_erdos_gallai().strict_pass;
        let m_even = self.total % 2 == 0;
        let m_large_enough = n.powf(1.0 + epsilon) <= m;
        // when no k satisfies S_k <= M/2 the gap condition cannot hold
        let nu_condition = match self.ell() {
            Ok(ell) => {
                let gap = (self.max_degree() - self.degrees[ell - 1] + 1) as f64;
                (n / m).sqrt() * gap < n.powf(-nu)
            }
            Err(DegseqError::NoFeasibleK) => false,
            Err(e) => return Err(e),
        };
        Ok(TypeClassification {
            epsilon,
            nu,
            is_strict_graphic,
            m_even,
            m_large_enough,
            nu_condition,
        })
    }

    /// Dense Erdős–Gallai conditions of type `(c1, c2, c3)`.
    ///
    /// Condition 2's infimum over subsets `B` with `|B| >= c2 n` is computed by
    /// restricting to `B` = the `b` largest-degree vertices for each feasible
    /// size `b`: with `D` sorted this choice simultaneously maximizes
    /// `sum_{i in B} d_i` and minimizes `sum_{j not in B} min(d_j, |B|)`, so it
    /// attains the infimum. Verified against a brute-force oracle in tests.
    pub fn check_dense_eg(&self, c1: f64, c2: f64, c3: f64) -> DenseEGReport {
        assert!(0.0 < c2 && c2 <= c1 && c1 < 1.0 && c3 > 0.0);
        let n = self.n();
        let nf = n as f64;
        let lo = c2 * (nf - 1.0);
        let hi = c1 * (nf - 1.0);
        let condition1 = self
            .degrees
            .iter()
            .all(|&d| lo <= d as f64 && d as f64 <= hi);

        let mut prefix = vec![0u64; n + 1];
        for i in 0..n {
            prefix[i + 1] = prefix[i] + self.degrees[i];
        }
        let min_b = (c2 * nf).ceil() as usize;
        let mut infimum = f64::INFINITY;
        for b in min_b.max(1)..=n {
            // B = top-b degrees; the rest are the n-b smallest
            let in_b: i64 = (prefix[n] - prefix[n - b]) as i64;
            let cut = self.degrees[..n - b].partition_point(|&d| d <= b as u64);
            let out_b: i64 = prefix[cut] as i64 + (b as i64) * ((n - b - cut) as i64);
            let value = (out_b + (b as i64) * (b as i64 - 1) - in_b) as f64 / (nf * nf);
            infimum = infimum.min(value);
        }
        let condition2 = infimum >= c3;
        DenseEGReport {
            condition1,
            condition2,
            infimum,
            pass: condition1 && condition2,
        }
    }

    /// `I_alpha = {i : d_i <= log^alpha(n)}` (natural log), 0-indexed sorted positions.
    pub fn small_degree_set(&self, alpha: f64) -> Vec<usize> {
        assert!(alpha > 0.0);
        let threshold = (self.n() as f64).ln().powf(alpha);
        (0..self.n())
            .filter(|&i| self.degrees[i] as f64 <= threshold)
            .collect()
    }

    /// Builds a simple graph realizing this degree sequence, or `Infeasible`.
    /// Vertices of the output are in sorted-degree order.
    pub fn havel_hakimi(&self) -> Result<SimpleGraph, DegseqError> {
        let n = self.n();
        let mut remaining: Vec<(u64, usize)> =
            (0..n).map(|i| (self.degrees[i], i)).collect();
        let mut edges = Vec::new();
        loop {
            remaining.sort_by(|a, b| b.0.cmp(&a.0));
            let (d, v) = remaining[0];
            if d == 0 {
                break;
            }
            if (d as usize) >= remaining.len() {
                return Err(DegseqError::Infeasible);
            }
            remaining[0].0 = 0;
            for slot in remaining.iter_mut().take(d as usize + 1).skip(1) {
                if slot.0 == 0 {
                    return Err(DegseqError::Infeasible);
                }
                slot.0 -= 1;
                edges.push((v, slot.1));
            }
        }
        Ok(SimpleGraph::from_edges(n, &edges).expect("havel-hakimi emits simple edges"))
    }
}

/// Per-k Erdős–Gallai margins with strict and non-strict verdicts.
#[derive(Debug, Clone, Serialize)]
pub struct EGReport {
    pub strict_pass: bool,
    pub nonstrict_pass: bool,
    pub m_even: bool,
    /// `(lhs, rhs)` for k = 1..n.
    pub margins: Vec<(u64, u64)>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TypeClassification {
    pub epsilon: f64,
    pub nu: f64,
    pub is_strict_graphic: bool,
    pub m_even: bool,
    pub m_large_enough: bool,
    pub nu_condition: bool,
}

impl TypeClassification {
    /// Full type-(ε,ν) verdict.
    pub fn is_type_eps_nu(&self) -> bool {
        self.is_strict_graphic && self.m_even && self.m_large_enough && self.nu_condition
    }

    /// Type-ε verdict (first two conditions only).
    pub fn is_type_eps(&self) -> bool {
        self.is_strict_graphic && self.m_even && self.m_large_enough
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DenseEGReport {
    pub condition1: bool,
    pub condition2: bool,
    pub infimum: f64,
    pub pass: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(v: &[u64]) -> DegreeSequence {
        DegreeSequence::new(v.to_vec()).unwrap()
    }

    #[test]
    fn eg_all_ones() {
        let report = ds(&[1, 1, 1, 1]).check_erdos_gallai();
        assert!(report.strict_pass);
        assert!(report.nonstrict_pass);
        assert_eq!(report.margins[0], (1, 3));
    }

    #[test]
    fn eg_triangle_fails_strict() {
        let report = ds(&[2, 2, 2]).check_erdos_gallai();
        assert!(!report.strict_pass);
        assert!(report.nonstrict_pass);
        // k=1: lhs 2, rhs 0 + min(1,2)*2 = 2
        assert_eq!(report.margins[0], (2, 2));
    }

    #[test]
    fn eg_k4_fails_strict() {
        let report = ds(&[3, 3, 3, 3]).check_erdos_gallai();
        assert!(!report.strict_pass);
        assert!(report.nonstrict_pass);
    }

    #[test]
    fn s_k_examples() {
        let d = ds(&[1, 2, 2, 3]);
        assert_eq!(d.s_k(4).unwrap(), 7);
        assert_eq!(ds(&[1, 1]).s_k(1).unwrap(), 1);
        assert_eq!(ds(&[2, 2, 2]).s_k(2).unwrap(), 4);
        assert!(matches!(
            d.s_k(0),
            Err(DegseqError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn ell_examples() {
        assert_eq!(ds(&[1, 1, 1, 1, 2, 2]).ell().unwrap(), 6);
        assert_eq!(ds(&[1, 1]).ell().unwrap(), 2);
        // d_n^2 < M/2 implies ell = n
        let d = ds(&[2; 20]);
        assert!(d.max_degree() * d.max_degree() < d.total() / 2);
        assert_eq!(d.ell().unwrap(), 20);
    }

    #[test]
    fn ell_in_range_whenever_feasible() {
        for degs in [&[1u64, 1][..], &[2, 2, 2], &[1, 2, 2, 3], &[3, 3, 3, 3]] {
            let d = ds(degs);
            if 2 * d.s_k(1).unwrap() <= d.total() {
                let l = d.ell().unwrap();
                assert!(l >= 1 && l <= d.n());
            }
        }
    }

    #[test]
    fn classify_type_examples() {
        let c = ds(&[1, 1, 1, 1]).classify_type(0.5, 0.1).unwrap();
        assert!(c.m_even);
        assert!(c.is_strict_graphic);
        assert!(!c.m_large_enough); // 4 < 4^1.5
        let c = ds(&[2, 2, 2]).classify_type(0.2, 0.1).unwrap();
        assert!(!c.is_strict_graphic);
        assert!(!c.is_type_eps_nu());
    }

    #[test]
    fn classify_type_regular_power_law() {
        // regular d = ceil(n^0.6), n = 64: nu condition holds for nu < eps/2 with eps = 0.2
        let n = 64usize;
        let d = (n as f64).powf(0.6).ceil() as u64;
        let seq = ds(&vec![d; n]);
        let c = seq.classify_type(0.2, 0.09).unwrap();
        assert!(c.nu_condition);
        assert!(c.m_large_enough);
    }

    #[test]
    fn dense_eg_examples() {
        let n = 10u64;
        let d = (n - 1) / 2;
        let r = ds(&vec![d; n as usize]).check_dense_eg(0.6, 0.4, 0.01);
        assert!(r.condition1);

        let r = ds(&[1, 4, 4, 4, 4, 5]).check_dense_eg(0.9, 0.3, 0.01);
        assert!(!r.condition1); // d_1 = 1 < c2 (n-1)

        let n = 8;
        let complete = ds(&vec![(n - 1) as u64; n]);
        assert!(!complete.check_dense_eg(0.99, 0.3, 0.01).condition1);
    }

    /// Brute-force infimum over ALL subsets B with |B| >= c2 n.
    fn dense_infimum_brute(d: &DegreeSequence, c2: f64) -> f64 {
        let n = d.n();
        let min_b = (c2 * n as f64).ceil() as usize;
        let mut inf = f64::INFINITY;
        for mask in 1u32..(1 << n) {
            let b = mask.count_ones() as usize;
            if b < min_b.max(1) {
                continue;
            }
            let mut in_b = 0i64;
            let mut out_b = 0i64;
            for i in 0..n {
                if mask & (1 << i) != 0 {
                    in_b += d.degree(i) as i64;
                } else {
                    out_b += (d.degree(i) as i64).min(b as i64);
                }
            }
            let v = (out_b + (b as i64) * (b as i64 - 1) - in_b) as f64 / ((n * n) as f64);
            inf = inf.min(v);
        }
        inf
    }

    #[test]
    fn dense_eg_infimum_matches_brute_force() {
        let cases: Vec<Vec<u64>> = vec![
            vec![3, 3, 4, 4, 5, 5, 5, 5],
            vec![2, 2, 2, 2, 2, 2],
            vec![1, 2, 3, 4, 5, 5, 4, 3, 2, 1],
            vec![4; 9],
            vec![1, 1, 2, 2, 3, 3, 4, 4, 5, 5, 6, 6],
        ];
        for degs in cases {
            let d = DegreeSequence::new(degs).unwrap();
            for c2 in [0.2, 0.4, 0.6] {
                let fast = d.check_dense_eg(0.99, c2, 1e-9).infimum;
                let brute = dense_infimum_brute(&d, c2);
                assert!(
                    (fast - brute).abs() < 1e-12,
                    "fast {fast} vs brute {brute} for {:?} c2={c2}",
                    d.degrees()
                );
            }
        }
    }

    #[test]
    fn small_degree_set_examples() {
        let d = ds(&[1, 1, 10, 10]);
        assert_eq!(d.small_degree_set(1.0), vec![0, 1]);
        let d = ds(&[10, 10, 10]);
        assert!(d.small_degree_set(1.0).is_empty());
        let d = ds(&[1, 1, 1]);
        assert_eq!(d.small_degree_set(0.5).len(), 3);
    }

    #[test]
    fn small_degree_set_monotone_in_alpha() {
        let d = ds(&[1, 2, 3, 5, 8, 13, 21]);
        let mut prev: Vec<usize> = vec![];
        for alpha in [0.2, 0.5, 1.0, 1.5, 2.0, 3.0] {
            let cur = d.small_degree_set(alpha);
            assert!(prev.iter().all(|i| cur.contains(i)));
            prev = cur;
        }
    }

    #[test]
    fn havel_hakimi_examples() {
        let g = ds(&[2, 2, 2]).havel_hakimi().unwrap();
        assert_eq!(g.edge_count(), 3);
        assert!(g.degrees().iter().all(|&d| d == 2));

        let g = ds(&[1, 1]).havel_hakimi().unwrap();
        assert_eq!(g.edge_count(), 1);

        assert!(matches!(
            ds(&[3, 1, 1]).havel_hakimi(),
            Err(DegseqError::Infeasible)
        ));
    }

    #[test]
    fn havel_hakimi_matches_nonstrict_eg() {
        // degree sequences of actual graphs are graphical
        use rand::prelude::*;
        use rand::rngs::StdRng;
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..50 {
            let n = rng.gen_range(3..12);
            let p = rng.gen_range(0.2..0.9);
            let mut degs = vec![0u64; n];
            for i in 0..n {
                for j in (i + 1)..n {
                    if rng.gen_bool(p) {
                        degs[i] += 1;
                        degs[j] += 1;
                    }
                }
            }
            if degs.iter().any(|&d| d == 0) {
                continue;
            }
            let d = DegreeSequence::new(degs).unwrap();
            let report = d.check_erdos_gallai();
            assert!(report.nonstrict_pass && report.m_even);
            let g = d.havel_hakimi().unwrap();
            let mut got: Vec<u64> = g.degrees();
            got.sort_unstable();
            assert_eq!(got, d.degrees());
        }
    }

    #[test]
    fn rejects_zero_degree() {
        assert!(matches!(
            DegreeSequence::new(vec![0, 1]),
            Err(DegseqError::ZeroDegree(0))
        ));
        assert!(matches!(DegreeSequence::new(vec![]), Err(DegseqError::Empty)));
    }
}
