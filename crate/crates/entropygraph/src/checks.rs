//! End-to-end validation suite: exact identities, finite-size inequalities,
//! oracle equivalences, and soft trend reports, each returning a
//! [`CriterionResult`] so the CLI and the test harness share one engine.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::degseq::DegreeSequence;
use crate::entropy::{
    dual_objectives, log_prob_graph, mckay_log_count, q_model, solve_bipartite_max_entropy,
    solve_max_entropy,
};
use crate::graphs::{
    conditional_probability_identity_check, enumerate_ga, enumerate_gd, sample_bernoulli,
    BernoulliModel, GraphSampler, Method, SamplerConfig, SimpleGraph, UniformGaSampler,
    UniformGdSampler,
};
use crate::rounding::{degree_guarantee_holds, round_to_integral, WeightedBipartiteGraph};
use crate::stats::{
    delta_bounds_check, full_tree_family, janson_bound, janson_parameters, lower_bound_pipeline,
    total_sum_check, weighted_l_statistic, LMode, Law,
};
use crate::trees::{
    enumerate_trees, pruefer_decode, pruefer_encode, psi, weighted_embedding_sum_self,
    LabeledTree, OrderedTree, PrueferCode,
};

/// Outcome of one validation criterion.
#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub pass: bool,
    /// Hard criteria must pass; soft ones are trend reports, logged only.
    pub hard: bool,
    pub details: String,
}

impl CriterionResult {
    fn hard(id: usize, name: &'static str, pass: bool, details: String) -> Self {
        Self {
            id,
            name,
            pass,
            hard: true,
            details,
        }
    }

    fn soft(id: usize, name: &'static str, pass: bool, details: String) -> Self {
        Self {
            id,
            name,
            pass,
            hard: false,
            details,
        }
    }
}

fn sorted_pos_of_original(d: &DegreeSequence, original: usize) -> usize {
    (0..d.n())
        .find(|&i| d.original_index(i) == original)
        .expect("original index present")
}

/// B-function on a hand-checked instance: degrees (3,1,2,1,3,3,4,3) with a
/// 3-path centered on the degree-4 vertex gives exactly that degree, since
/// the exponents b_u - 1 sum to k - 2 = 1 (leaves contribute exponent 0).
pub fn check_psi_instance() -> CriterionResult {
    let d = DegreeSequence::new(vec![3, 1, 2, 1, 3, 3, 4, 3]).unwrap();
    let path = LabeledTree::new(3, vec![(0, 1), (1, 2)]).unwrap();
    let placement = vec![
        sorted_pos_of_original(&d, 7), // original vertex 8
        sorted_pos_of_original(&d, 6), // original vertex 7, tree degree 2
        sorted_pos_of_original(&d, 4), // original vertex 5
    ];
    let ot = OrderedTree::new(path, placement).unwrap();
    let value = psi(&ot, &d);
    CriterionResult::hard(
        1,
        "psi hand instance",
        value == 4.0,
        format!("psi = {value}, expected 4 (= center degree)"),
    )
}

/// Cayley counts k^(k-2) for k = 2..7 plus a large random codec round trip.
pub fn check_tree_enumeration() -> CriterionResult {
    let expected = [1usize, 3, 16, 125, 1296, 16807];
    let mut ok = true;
    let mut details = String::new();
    for (k, &want) in (2..=7).zip(&expected) {
        let trees = enumerate_trees(k).unwrap();
        let distinct: std::collections::HashSet<_> =
            trees.iter().map(|t| t.edges().to_vec()).collect();
        if trees.len() != want || distinct.len() != want {
            ok = false;
        }
        details.push_str(&format!("k={k}: {} trees; ", trees.len()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut round_trips = 0usize;
    for _ in 0..10_000 {
        let k = rng.gen_range(3..=9usize);
        let entries: Vec<usize> = (0..k - 2).map(|_| rng.gen_range(0..k)).collect();
        let code = PrueferCode {
            entries: entries.clone(),
        };
        let tree = pruefer_decode(k, &code).unwrap();
        if pruefer_encode(&tree).entries == entries {
            round_trips += 1;
        }
    }
    if round_trips != 10_000 {
        ok = false;
    }
    details.push_str(&format!("codec round trips {round_trips}/10000"));
    CriterionResult::hard(2, "tree counts and codec", ok, details)
}

fn random_graphic_sequence(
    rng: &mut impl Rng,
    n_range: std::ops::RangeInclusive<usize>,
    d_max: u64,
    strict: bool,
) -> DegreeSequence {
    loop {
        let n = rng.gen_range(n_range.clone());
        let cap = d_max.min(n as u64 - 1).max(1);
        let mut degs: Vec<u64> = (0..n).map(|_| rng.gen_range(1..=cap)).collect();
        if degs.iter().sum::<u64>() % 2 == 1 {
            degs[0] = if degs[0] > 1 { degs[0] - 1 } else { degs[0] + 1 };
            if degs[0] > cap {
                continue;
            }
        }
        if let Ok(d) = DegreeSequence::new(degs) {
            let eg = d.check_erdos_gallai();
            if (strict && eg.strict_pass) || (!strict && eg.nonstrict_pass) {
                return d;
            }
        }
    }
}

/// Embedding-sum sandwich `M - nk(k-1)/2 <= F(T,G) <= M` on random graphs.
pub fn check_embedding_sum_bounds() -> CriterionResult {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let budget = 100_000_000u64;
    let mut worst_low = f64::INFINITY;
    let mut worst_high = -f64::INFINITY;
    let mut ok = true;
    for _ in 0..200 {
        let d = random_graphic_sequence(&mut rng, 6..=30, 6, false);
        let mut sampler = UniformGdSampler::new(
            &d,
            SamplerConfig::new(rng.gen(), Method::SwitchMcmc),
        )
        .unwrap();
        let g = sampler.sample();
        let n = g.n() as f64;
        let m = d.total() as f64;
        for k in 2..=4usize {
            let slack = n * (k * (k - 1)) as f64 / 2.0;
            for tree in enumerate_trees(k).unwrap() {
                let f = weighted_embedding_sum_self(&tree, &g, budget).unwrap();
                worst_low = worst_low.min(f - (m - slack));
                worst_high = worst_high.max(f - m);
                if f < m - slack - 1e-9 || f > m + 1e-9 {
                    ok = false;
                }
                if k == 2 && (f - m).abs() > 1e-9 {
                    ok = false;
                }
            }
        }
    }
    CriterionResult::hard(
        3,
        "embedding sum bounds",
        ok,
        format!("min slack above lower bound {worst_low:.3e}, max excess over M {worst_high:.3e}"),
    )
}

/// Fixed-point solver: regular closed forms, convergence on random strict
/// sequences, monotone r, the r1*rn > 1/n bound, the dual/entropy identity,
/// and the witness log-probability bound.
pub fn check_max_entropy() -> CriterionResult {
    let mut ok = true;
    let mut details = String::new();
    for (n, ds) in [(4usize, vec![1u64, 2]), (10, vec![3, 6]), (50, vec![7, 20])] {
        for deg in ds {
            let d = DegreeSequence::new(vec![deg; n]).unwrap();
            let sol = solve_max_entropy(&d, 1e-12, 10_000).unwrap();
            let p = deg as f64 / (n as f64 - 1.0);
            let err = (sol.p_tilde(0, 1) - p).abs();
            if err > 1e-8 {
                ok = false;
                details.push_str(&format!("regular n={n} d={deg} p error {err:.2e}; "));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst_res = 0.0f64;
    let mut worst_dual = 0.0f64;
    for t in 0..100 {
        let d = random_graphic_sequence(&mut rng, 4..=50, 12, true);
        let sol = match solve_max_entropy(&d, 1e-10, 20_000) {
            Ok(s) => s,
            Err(e) => {
                ok = false;
                details.push_str(&format!("solve failed: {e}; "));
                continue;
            }
        };
        worst_res = worst_res.max(sol.max_residual());
        if sol.max_residual() > 1e-8 {
            ok = false;
        }
        let r = sol.r();
        if r.windows(2).any(|w| w[0] > w[1] * (1.0 + 1e-9)) {
            ok = false;
            details.push_str("r not sorted; ");
        }
        let n = d.n() as f64;
        if r[0] * r[r.len() - 1] <= 1.0 / n {
            ok = false;
            details.push_str("r1*rn <= 1/n; ");
        }
        if t < 20 {
            // dual identity G(r) = H1 = -log P(witness) and the witness bound
            let obj = dual_objectives(&d, r);
            let g_val = obj.g_value.unwrap();
            let h1 = sol.h1();
            let witness = d.havel_hakimi().unwrap();
            let lp = log_prob_graph(&sol, &witness);
            worst_dual = worst_dual.max((g_val - h1).abs().max((lp + h1).abs()));
            if (g_val - h1).abs() > 1e-6 || (lp + h1).abs() > 1e-6 {
                ok = false;
                details.push_str(&format!(
                    "dual mismatch G={g_val:.9} H1={h1:.9} logP={lp:.9}; "
                ));
            }
            let m = d.total() as f64;
            if d.total() <= (d.n() * (d.n() - 1) / 2) as u64 {
                let bound = m * (m / (n * (n - 1.0))).ln();
                if lp < bound - 1e-9 {
                    ok = false;
                    details.push_str(&format!("witness logP {lp:.6} < bound {bound:.6}; "));
                }
            }
        }
    }
    details.push_str(&format!(
        "max residual {worst_res:.2e}, max dual gap {worst_dual:.2e}"
    ));
    CriterionResult::hard(4, "max entropy solver", ok, details)
}

/// Analytic gradients of both dual objectives vs central differences.
pub fn check_gradients() -> CriterionResult {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut worst = 0.0f64;
    let mut ok = true;
    for _ in 0..50 {
        let n = rng.gen_range(3..=8usize);
        let degs: Vec<u64> = (0..n).map(|_| rng.gen_range(1..n as u64)).collect();
        let d = DegreeSequence::new(degs).unwrap();
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..2.0)).collect();
        for (point, grad_of) in [
            (x.clone(), 0usize), // F at log-weights
            (w.clone(), 1),      // G at weights
        ] {
            let obj = dual_objectives(&d, &point);
            let grad = if grad_of == 0 {
                obj.grad_f.clone()
            } else {
                obj.grad_g.clone().unwrap()
            };
            for i in 0..n {
                let h = 1e-6 * (1.0 + point[i].abs());
                let mut plus = point.clone();
                plus[i] += h;
                let mut minus = point.clone();
                minus[i] -= h;
                let (fp, fm) = if grad_of == 0 {
                    (
                        dual_objectives(&d, &plus).f_value,
                        dual_objectives(&d, &minus).f_value,
                    )
                } else {
                    (
                        dual_objectives(&d, &plus).g_value.unwrap(),
                        dual_objectives(&d, &minus).g_value.unwrap(),
                    )
                };
                let fd = (fp - fm) / (2.0 * h);
                let rel = (grad[i] - fd).abs() / grad[i].abs().max(fd.abs()).max(1.0);
                worst = worst.max(rel);
                if rel > 1e-5 {
                    ok = false;
                }
            }
        }
    }
    CriterionResult::hard(
        5,
        "dual gradient checks",
        ok,
        format!("worst relative error {worst:.2e}"),
    )
}

/// Sparse-surrogate degree sandwich on random sequences.
pub fn check_q_sandwich() -> CriterionResult {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut ok = true;
    for _ in 0..100 {
        let d = random_graphic_sequence(&mut rng, 3..=40, 10, false);
        if !q_model(&d).sandwich_holds() {
            ok = false;
        }
    }
    CriterionResult::hard(6, "q model degree sandwich", ok, "100 random sequences".into())
}

/// Asymptotic count formula vs exhaustive enumeration on tiny instances.
pub fn check_count_formula() -> CriterionResult {
    let mut ok = true;
    let mut details = String::new();
    let cases: [(&[u64], f64, f64); 3] = [
        (&[1, 1], 1.0, 1e-12),
        (&[1, 1, 1, 1], 3.0, 1e-9),
        (&[2, 2, 2], 1.0, f64::NAN), // ratio band case, handled below
    ];
    for (degs, _, _) in &cases[..2] {
        let d = DegreeSequence::new(degs.to_vec()).unwrap();
        let formula = mckay_log_count(&d).unwrap().exp();
        let exact = enumerate_gd(&d).unwrap().len() as f64;
        if (formula - exact).abs() > 1e-9 {
            ok = false;
        }
        details.push_str(&format!("D={degs:?}: formula {formula:.9} exact {exact}; "));
    }
    let d = DegreeSequence::new(vec![2, 2, 2]).unwrap();
    let formula = mckay_log_count(&d).unwrap().exp();
    let exact = enumerate_gd(&d).unwrap().len() as f64;
    let ratio = formula / exact;
    // band exp(+-2 d_n^2 / M) = exp(+-4/3)
    let band = (2.0 * 4.0 / 6.0f64).exp();
    if !(ratio >= 1.0 / band && ratio <= band) {
        ok = false;
    }
    details.push_str(&format!("D=[2,2,2]: ratio {ratio:.6} in [{:.4},{band:.4}]", 1.0 / band));
    CriterionResult::hard(7, "count formula vs enumeration", ok, details)
}

fn graph_key(g: &SimpleGraph) -> Vec<(usize, usize)> {
    g.edges()
}

fn uniformity_3sigma(
    sampler: &mut dyn GraphSampler,
    members: &[SimpleGraph],
    n_samples: usize,
) -> (bool, f64) {
    use std::collections::HashMap;
    let mut index: HashMap<Vec<(usize, usize)>, usize> = HashMap::new();
    for (i, g) in members.iter().enumerate() {
        index.insert(graph_key(g), i);
    }
    let mut counts = vec![0usize; members.len()];
    for _ in 0..n_samples {
        let g = sampler.sample();
        match index.get(&graph_key(&g)) {
            Some(&i) => counts[i] += 1,
            None => return (false, f64::INFINITY),
        }
    }
    let p = 1.0 / members.len() as f64;
    let expected = n_samples as f64 * p;
    let sigma = (n_samples as f64 * p * (1.0 - p)).sqrt();
    let mut chi2 = 0.0;
    let mut all_within = true;
    for &c in &counts {
        let dev = c as f64 - expected;
        chi2 += dev * dev / expected;
        if dev.abs() > 3.0 * sigma {
            all_within = false;
        }
    }
    (all_within, chi2)
}

/// Switch-chain and toggle-chain frequencies vs exhaustive oracles.
pub fn check_sampler_uniformity() -> CriterionResult {
    let d = DegreeSequence::new(vec![2, 2, 2, 2]).unwrap();
    let gd = enumerate_gd(&d).unwrap();
    let mut ok = gd.len() == 3;
    let mut details = format!("|G^D| = {}; ", gd.len());

    let mut sw = UniformGdSampler::new(&d, SamplerConfig::new(97, Method::SwitchMcmc)).unwrap();
    let (within, chi2) = uniformity_3sigma(&mut sw, &gd, 30_000);
    ok &= within;
    details.push_str(&format!("switch chi2 {chi2:.2}; "));

    let ga = enumerate_ga(&d, 0.6).unwrap();
    let mut tg = UniformGaSampler::new(&d, 0.6, SamplerConfig::new(98, Method::ToggleMcmc)).unwrap();
    let (within, chi2) = uniformity_3sigma(&mut tg, &ga, 30_000);
    ok &= within;
    details.push_str(&format!("|G_a^D| = {}, toggle chi2 {chi2:.2}", ga.len()));
    CriterionResult::hard(8, "sampler uniformity", ok, details)
}

/// `P(G~ in G^D) = |G^D| e^{-H1}` against Monte-Carlo frequency.
pub fn check_conditional_probability() -> CriterionResult {
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    let mut ok = true;
    let mut details = String::new();
    for degs in [vec![2u64, 2, 2, 2], vec![1, 1, 1, 1]] {
        let d = DegreeSequence::new(degs.clone()).unwrap();
        let sol = solve_max_entropy(&d, 1e-12, 10_000).unwrap();
        let rep = conditional_probability_identity_check(&d, &sol, 100_000, &mut rng).unwrap();
        ok &= rep.pass;
        details.push_str(&format!(
            "D={degs:?}: predicted {:.5} empirical {:.5} (3s {:.5}); ",
            rep.predicted, rep.empirical, rep.three_sigma
        ));
    }
    CriterionResult::hard(9, "conditional probability identity", ok, details)
}

/// Lower-tail inequality on the edge family and the weighted 3-path family,
/// plus the exact delta bounds on the enumerable family.
pub fn check_lower_tail() -> CriterionResult {
    let mut ok = true;
    let mut details = String::new();
    let eps_list = [0.1, 0.3, 0.5];
    let reps = 100_000usize;
    let mut rng = ChaCha8Rng::seed_from_u64(61);

    // (a) edge-count family on a homogeneous model: S is the edge count
    {
        let n = 20usize;
        let p = 0.3;
        let model = BernoulliModel::Uniform { n, p };
        let pairs = (n * (n - 1) / 2) as f64;
        let lambda = pairs * p;
        let delta1 = p * pairs / lambda; // = 1, unit weights
        let mut hits = [0usize; 3];
        for _ in 0..reps {
            let s = sample_bernoulli(&model, &mut rng).edge_count() as f64;
            for (t, &eps) in eps_list.iter().enumerate() {
                if s <= (1.0 - eps) * lambda {
                    hits[t] += 1;
                }
            }
        }
        for (t, &eps) in eps_list.iter().enumerate() {
            let bound = janson_bound(lambda, delta1, 0.0, eps).unwrap();
            let freq = hits[t] as f64 / reps as f64;
            let sigma = (bound.min(1.0).max(freq) * (1.0 - bound.min(1.0).max(freq) / 2.0)
                / reps as f64)
                .sqrt();
            if freq > bound + 3.0 * sigma {
                ok = false;
            }
            details.push_str(&format!("edges eps={eps}: freq {freq:.4} <= bound {bound:.4}; "));
        }
    }

    // (b) weighted placed 3-path family on the regular n=8 d=3 tilde model
    {
        let d = DegreeSequence::new(vec![3u64; 8]).unwrap();
        let sol = solve_max_entropy(&d, 1e-12, 10_000).unwrap();
        let model = BernoulliModel::from_solution(&sol);
        let fam = full_tree_family(&d, 3).unwrap();
        let params = janson_parameters(&fam, &model).unwrap();
        // precompute bitmask members for speed
        let n = 8usize;
        let pair = |u: usize, v: usize| {
            let (a, b) = if u < v { (u, v) } else { (v, u) };
            a * n - a * (a + 1) / 2 + (b - a - 1)
        };
        let members: Vec<(u64, f64)> = fam
            .members()
            .iter()
            .map(|m| {
                let mask = m
                    .edges
                    .iter()
                    .fold(0u64, |acc, &(u, v)| acc | (1 << pair(u, v)));
                (mask, 1.0 / m.omega)
            })
            .collect();
        let mut hits = [0usize; 3];
        for _ in 0..reps {
            let g = sample_bernoulli(&model, &mut rng);
            let gmask = g
                .edges()
                .iter()
                .fold(0u64, |acc, &(u, v)| acc | (1 << pair(u, v)));
            let s: f64 = members
                .iter()
                .filter(|(m, _)| gmask & m == *m)
                .map(|(_, w)| w)
                .sum();
            for (t, &eps) in eps_list.iter().enumerate() {
                if s <= (1.0 - eps) * params.lambda {
                    hits[t] += 1;
                }
            }
        }
        for (t, &eps) in eps_list.iter().enumerate() {
            let bound = janson_bound(params.lambda, params.delta1, params.delta2, eps).unwrap();
            let freq = hits[t] as f64 / reps as f64;
            let sigma = (bound.min(1.0).max(freq) / reps as f64).sqrt();
            if freq > bound + 3.0 * sigma {
                ok = false;
            }
            details.push_str(&format!("paths eps={eps}: freq {freq:.4} <= bound {bound:.4}; "));
        }
        // exact delta bounds on the enumerable family
        let rep = delta_bounds_check(&d, &sol, 3).unwrap();
        ok &= rep.delta1_ok && rep.delta2_ok;
        details.push_str(&format!(
            "delta1 {:.3e} <= 1/M {:.3e}, delta2 {:.3e} <= C_k/M {:.3e}",
            rep.delta1,
            1.0 / rep.m,
            rep.delta2,
            rep.c_k / rep.m
        ));
    }
    CriterionResult::hard(10, "lower tail inequality", ok, details)
}

/// Degree guarantee and progress bound for the rounding procedure.
pub fn check_rounding() -> CriterionResult {
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    let mut ok = true;
    let mut max_augs_over_support = 0.0f64;
    for _ in 0..500 {
        let n1 = rng.gen_range(1..=20usize);
        let n2 = rng.gen_range(1..=20usize);
        let mut w = WeightedBipartiteGraph::new(n1, n2);
        let mut support = 0usize;
        for i in 0..n1 {
            for j in 0..n2 {
                let x: f64 = rng.gen();
                if x > 1e-9 {
                    support += 1;
                }
                w.set(i, j, x).unwrap();
            }
        }
        let (g, trace) = round_to_integral(&w).unwrap();
        if !degree_guarantee_holds(&w, &g) {
            ok = false;
        }
        if trace.augmentations.len() > support {
            ok = false;
        }
        if support > 0 {
            max_augs_over_support =
                max_augs_over_support.max(trace.augmentations.len() as f64 / support as f64);
        }
    }
    // hand instance: cycle kill first, then paths, every step kills an edge
    let mut w = WeightedBipartiteGraph::new(2, 3);
    for (i, j, x) in [(0, 0, 0.4), (0, 1, 0.2), (1, 0, 0.5), (1, 1, 0.3), (1, 2, 0.1)] {
        w.set(i, j, x).unwrap();
    }
    let (g, trace) = round_to_integral(&w).unwrap();
    ok &= degree_guarantee_holds(&w, &g);
    ok &= trace
        .augmentations
        .iter()
        .all(|a| !a.killed.is_empty() && a.c >= 0.0);
    ok &= matches!(
        trace.augmentations.first().map(|a| a.kind),
        Some(crate::rounding::AugmentationKind::Cycle)
    );
    CriterionResult::hard(
        11,
        "rounding degree guarantee",
        ok,
        format!(
            "500 random instances; max augmentations/support {max_augs_over_support:.3}; \
             hand trace has {} steps",
            trace.augmentations.len()
        ),
    )
}

/// Bipartite marginal fitting on random feasible margins.
pub fn check_bipartite_entropy() -> CriterionResult {
    let mut rng = ChaCha8Rng::seed_from_u64(83);
    let mut ok = true;
    let mut worst = 0.0f64;
    let mut done = 0usize;
    while done < 50 {
        let n1 = rng.gen_range(2..=30usize);
        let n2 = rng.gen_range(2..=30usize);
        // margins realized by an actual random bipartite graph are feasible
        let mut rows = vec![0u64; n1];
        let mut cols = vec![0u64; n2];
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, col) in cols.iter_mut().enumerate() {
                // guarantee positivity via a diagonal band plus random edges
                if rng.gen_bool(0.4) || j == i % n2 || i == j % n1 {
                    *row += 1;
                    *col += 1;
                }
            }
        }
        let d1 = DegreeSequence::new(rows).unwrap();
        let d2 = DegreeSequence::new(cols).unwrap();
        match solve_bipartite_max_entropy(&d1, &d2, 1e-10, 20_000) {
            Ok(sol) => {
                worst = worst.max(sol.max_residual());
                if sol.max_residual() > 1e-8 {
                    ok = false;
                }
                done += 1;
            }
            Err(_) => continue, // boundary margins (e.g. full row) are skipped
        }
    }
    let d1 = DegreeSequence::new(vec![1, 1]).unwrap();
    let sol = solve_bipartite_max_entropy(&d1, &d1, 1e-12, 10_000).unwrap();
    let half_err = (sol.p_tilde(0, 0) - 0.5).abs();
    ok &= half_err < 1e-10;
    CriterionResult::hard(
        12,
        "bipartite entropy marginals",
        ok,
        format!("worst residual {worst:.2e}; (1,1)x(1,1) p error {half_err:.2e}"),
    )
}

/// Exact discrepancy identities at enumerable scale.
pub fn check_exact_l_identities() -> CriterionResult {
    let d = DegreeSequence::new(vec![2u64, 2, 2, 2]).unwrap();
    let mut ok = true;
    let mut details = String::new();
    let same = weighted_l_statistic(&d, 2, Law::Tilde, Law::Tilde, LMode::ExactTiny, 0).unwrap();
    ok &= same.value == 0.0;
    details.push_str(&format!("L(tilde,tilde) = {}; ", same.value));
    let lg = weighted_l_statistic(&d, 2, Law::UniformGd, Law::Tilde, LMode::ExactTiny, 0).unwrap();
    ok &= lg.value < 1e-9;
    details.push_str(&format!("L_g k=2 = {:.3e}; ", lg.value));
    let mut sampler = UniformGdSampler::new(&d, SamplerConfig::new(5, Method::ExactEnum)).unwrap();
    let total = total_sum_check(&mut sampler, &d, 2, 20, 1 << 30).unwrap();
    ok &= (total.estimate - 1.0).abs() < 1e-12;
    details.push_str(&format!("total sum k=2 = {:.12}", total.estimate));
    CriterionResult::hard(13, "exact discrepancy identities", ok, details)
}

/// Soft trend report: L_g (k=3) along growing density, and the lower-bound
/// pipeline membership frequency at n = 200. The asymptotic ">= 1/2" target
/// holds for large n only and is logged, not asserted.
pub fn check_trends() -> CriterionResult {
    let mut details = String::new();
    let mut values = Vec::new();
    for deg in 1..=6u64 {
        let d = DegreeSequence::new(vec![deg; 8]).unwrap();
        let rep =
            weighted_l_statistic(&d, 3, Law::UniformGd, Law::Tilde, LMode::ExactTiny, 0).unwrap();
        values.push(rep.value);
        details.push_str(&format!("L_g(d={deg}) = {:.5}; ", rep.value));
    }
    let decreasing_steps = values.windows(2).filter(|w| w[1] < w[0]).count();
    let trend_ok = decreasing_steps >= 4;
    details.push_str(&format!("{decreasing_steps}/5 steps decreasing; "));

    let d = DegreeSequence::new(vec![2u64; 200]).unwrap();
    let sol = solve_max_entropy(&d, 1e-10, 20_000).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let rep = lower_bound_pipeline(&d, &sol, 0.8, 200, &mut rng).unwrap();
    details.push_str(&format!(
        "pipeline n=200 a=0.8: |A| = {}, membership frequency {:.3} \
         (asymptotic target >= 0.5 is large-n only)",
        rep.a_set.len(),
        rep.membership_frequency
    ));
    CriterionResult::soft(14, "trend reports", trend_ok, details)
}

/// Runs the whole suite in order.
pub fn run_all() -> Vec<CriterionResult> {
    vec![
        check_psi_instance(),
        check_tree_enumeration(),
        check_embedding_sum_bounds(),
        check_max_entropy(),
        check_gradients(),
        check_q_sandwich(),
        check_count_formula(),
        check_sampler_uniformity(),
        check_conditional_probability(),
        check_lower_tail(),
        check_rounding(),
        check_bipartite_entropy(),
        check_exact_l_identities(),
        check_trends(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_criteria_pass() {
        for c in [check_psi_instance(), check_count_formula()] {
            assert!(c.pass, "{}: {}", c.name, c.details);
        }
    }
}
