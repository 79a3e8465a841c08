//! The pruning protocol: every node draws a budget of candidate edges with
//! probabilities given by a softmax of `-β · Δ(a_i, a_j)`, asks the
//! neighbors on those edges to drop them, honours incoming requests while it
//! still holds more than its retention floor, and finally the edge sets are
//! made symmetric again.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::Matrix;
use crate::stream;

/// Exponent gap beyond which a softmax weight is treated as exactly zero.
const SOFTMAX_CUTOFF: f64 = 700.0;

/// Slack absorbing representation error in `⌊κ·m⌋` and `⌈κ·m⌉`.
const COUNT_SLACK: f64 = 1e-9;

/// Softmax inverse temperature. `Greedy` is the `β = ∞` limit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BetaRepr", into = "BetaRepr")]
pub enum Beta {
    Finite(f64),
    Greedy,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum BetaRepr {
    Number(f64),
    Text(String),
}

impl TryFrom<BetaRepr> for Beta {
    type Error = Error;

    fn try_from(r: BetaRepr) -> Result<Self> {
        match r {
            BetaRepr::Number(b) => Beta::finite(b),
            BetaRepr::Text(s) => s.parse(),
        }
    }
}

impl From<Beta> for BetaRepr {
    fn from(b: Beta) -> Self {
        match b {
            Beta::Finite(v) => BetaRepr::Number(v),
            Beta::Greedy => BetaRepr::Text("greedy".into()),
        }
    }
}

impl Beta {
    pub fn finite(b: f64) -> Result<Self> {
        if b.is_finite() && b >= 0.0 {
            Ok(Beta::Finite(b))
        } else if b == f64::INFINITY {
            Ok(Beta::Greedy)
        } else {
            Err(Error::InvalidParameter(format!("beta must be >= 0, got {b}")))
        }
    }
}

impl FromStr for Beta {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "greedy" | "inf" | "infinity" => Ok(Beta::Greedy),
            other => other
                .parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("bad beta {s:?}")))
                .and_then(Beta::finite),
        }
    }
}

impl fmt::Display for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Beta::Finite(b) => write!(f, "{b}"),
            Beta::Greedy => write!(f, "greedy"),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dissimilarity {
    #[default]
    L1,
}

/// How one-sided edges are resolved after the request exchange.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetrization {
    /// The node that dropped the edge adds it back.
    #[default]
    Add,
    /// The node that kept the edge drops it too.
    Remove,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PruneParams {
    kappa_upper: Vec<f64>,
    kappa_lower: Vec<f64>,
    pub beta: Beta,
    #[serde(default)]
    pub dissimilarity: Dissimilarity,
    #[serde(default)]
    pub symmetrization: Symmetrization,
}

impl PruneParams {
    pub fn new(kappa_upper: Vec<f64>, kappa_lower: Vec<f64>, beta: Beta) -> Result<Self> {
        let params = Self {
            kappa_upper,
            kappa_lower,
            beta,
            dissimilarity: Dissimilarity::L1,
            symmetrization: Symmetrization::Add,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn uniform(n: usize, kappa_upper: f64, kappa_lower: f64, beta: Beta) -> Result<Self> {
        Self::new(vec![kappa_upper; n], vec![kappa_lower; n], beta)
    }

    /// No pruning at all (`κ̄ = 0` everywhere).
    pub fn disabled(n: usize) -> Self {
        Self::uniform(n, 0.0, 0.0, Beta::Finite(0.0)).expect("zero thresholds are valid")
    }

    /// Uniform `κ̄ = kappa` with a per-node floor that keeps at least one
    /// neighbor at every non-isolated node.
    pub fn keep_one_neighbor(g: &Graph, kappa: f64, beta: Beta) -> Result<Self> {
        let lower = (0..g.node_count())
            .map(|i| match g.degree(i) {
                0 => 0.0,
                d => (0.5 / d as f64).min(1.0 - kappa),
            })
            .collect();
        Self::new(vec![kappa; g.node_count()], lower, beta)
    }

    pub fn with_symmetrization(mut self, s: Symmetrization) -> Self {
        self.symmetrization = s;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.kappa_upper.len() != self.kappa_lower.len() {
            return Err(Error::NodeCountMismatch {
                expected: self.kappa_upper.len(),
                found: self.kappa_lower.len(),
            });
        }
        for (i, (&hi, &lo)) in self.kappa_upper.iter().zip(&self.kappa_lower).enumerate() {
            if !(0.0..=1.0).contains(&hi) || !(0.0..=1.0).contains(&lo) {
                return Err(Error::InvalidParameter(format!(
                    "node {i}: thresholds ({hi}, {lo}) must lie in [0, 1]"
                )));
            }
            if lo > 1.0 - hi + COUNT_SLACK {
                return Err(Error::InvalidParameter(format!(
                    "node {i}: kappa_lower {lo} exceeds 1 - kappa_upper {}",
                    1.0 - hi
                )));
            }
        }
        if let Beta::Finite(b) = self.beta {
            Beta::finite(b)?;
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.kappa_upper.len()
    }

    pub fn kappa_upper(&self) -> &[f64] {
        &self.kappa_upper
    }

    pub fn kappa_lower(&self) -> &[f64] {
        &self.kappa_lower
    }

    pub fn is_disabled(&self) -> bool {
        self.kappa_upper.iter().all(|&k| k == 0.0)
    }

    /// `⌊κ̄_i · degree⌋`
    pub fn budget(&self, i: usize, degree: usize) -> usize {
        (self.kappa_upper[i] * degree as f64 + COUNT_SLACK).floor() as usize
    }

    /// `⌈κ_i · degree⌉`
    pub fn floor_count(&self, i: usize, degree: usize) -> usize {
        (self.kappa_lower[i] * degree as f64 - COUNT_SLACK).ceil().max(0.0) as usize
    }
}

/// `‖a - b‖₁`
pub fn dissimilarity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(l1(a, b))
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Addresses the random draws of one pruning pass.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PruneStream {
    pub seed: u64,
    pub purpose: u64,
    pub cycle: u64,
}

impl PruneStream {
    pub fn new(seed: u64, purpose: u64, cycle: u64) -> Self {
        Self { seed, purpose, cycle }
    }

    fn uniform(&self, node: usize, draw: usize) -> f64 {
        stream::substream(self.seed, &[self.purpose, self.cycle, node as u64, draw as u64]).random()
    }
}

/// Candidate neighbors node `i` asks to prune, in draw order.
pub fn select_candidates(
    i: usize,
    estimates: &Matrix,
    g: &Graph,
    params: &PruneParams,
    stream: &PruneStream,
) -> Vec<usize> {
    let nbrs = g.neighbors(i);
    let budget = params.budget(i, nbrs.len());
    if budget == 0 {
        return Vec::new();
    }
    let own = estimates.row(i);
    let mut pool: Vec<(usize, f64)> = nbrs
        .iter()
        .map(|&j| match params.dissimilarity {
            Dissimilarity::L1 => (j, l1(own, estimates.row(j))),
        })
        .collect();

    match params.beta {
        Beta::Greedy => {
            pool.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
            pool.into_iter().take(budget).map(|(j, _)| j).collect()
        }
        Beta::Finite(beta) => {
            let mut picked = Vec::with_capacity(budget);
            for draw in 0..budget {
                let k = softmax_pick(&pool, beta, stream.uniform(i, draw));
                picked.push(pool.remove(k).0);
            }
            picked
        }
    }
}

/// Index into `pool` selected by inverse-CDF sampling of
/// `exp(-β Δ) / Σ exp(-β Δ')` with uniform variate `u ∈ [0, 1)`.
fn softmax_pick(pool: &[(usize, f64)], beta: f64, u: f64) -> usize {
    let shift = pool
        .iter()
        .map(|&(_, d)| beta * d)
        .fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = pool
        .iter()
        .map(|&(_, d)| {
            let gap = beta * d - shift;
            if gap > SOFTMAX_CUTOFF {
                0.0
            } else {
                (-gap).exp()
            }
        })
        .collect();
    let total: f64 = weights.iter().sum();
    let target = u * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (k, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            last_positive = k;
            acc += w;
            if target < acc {
                return k;
            }
        }
    }
    last_positive
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PruneOutcome {
    pub pruned_graph: Graph,
    /// `E_i^prune` per node, in draw order.
    pub candidates: Vec<Vec<usize>>,
    pub removed_count: usize,
    /// Neighbor estimates received to evaluate dissimilarities: `|E_i|`
    /// for every node with a nonzero budget.
    pub estimates_exchanged: usize,
}

#[derive(Serialize)]
struct PruneDump<'a> {
    candidates: &'a [Vec<usize>],
    edge_sets: Vec<&'a [usize]>,
    removed_count: usize,
}

impl PruneOutcome {
    /// Diagnostic JSON with per-node candidates and final edge sets.
    pub fn to_json(&self) -> Result<String> {
        let g = &self.pruned_graph;
        let dump = PruneDump {
            candidates: &self.candidates,
            edge_sets: (0..g.node_count()).map(|i| g.neighbors(i)).collect(),
            removed_count: self.removed_count,
        };
        Ok(serde_json::to_string_pretty(&dump)?)
    }
}

/// Runs one full pass of the protocol on `g` with node estimates given by the
/// rows of `estimates`.
pub fn execute_pruning(
    g: &Graph,
    estimates: &Matrix,
    params: &PruneParams,
    stream: &PruneStream,
) -> Result<PruneOutcome> {
    let n = g.node_count();
    if estimates.rows() != n {
        return Err(Error::NodeCountMismatch {
            expected: n,
            found: estimates.rows(),
        });
    }
    if params.n() != n {
        return Err(Error::NodeCountMismatch {
            expected: n,
            found: params.n(),
        });
    }

    let candidates: Vec<Vec<usize>> = (0..n)
        .map(|i| select_candidates(i, estimates, g, params, stream))
        .collect();
    let estimates_exchanged = (0..n)
        .filter(|&i| params.budget(i, g.degree(i)) > 0)
        .map(|i| g.degree(i))
        .sum();

    // keep[i * n + j]: whether (i, j) is still in node i's edge set
    let mut keep = vec![false; n * n];
    for i in 0..n {
        for &j in g.neighbors(i) {
            keep[i * n + j] = true;
        }
    }

    let mut is_candidate = vec![false; n * n];
    for (i, cands) in candidates.iter().enumerate() {
        for &j in cands {
            is_candidate[i * n + j] = true;
        }
    }

    // requests[i]: requesters j with (j, i) selected, ascending in j
    let mut requests: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (j, cands) in candidates.iter().enumerate() {
        for &i in cands {
            requests[i].push(j);
        }
    }

    for i in 0..n {
        // own candidates go unconditionally
        for &j in &candidates[i] {
            keep[i * n + j] = false;
        }
        let mut remaining = g.degree(i) - candidates[i].len();
        let floor = params.floor_count(i, g.degree(i));
        for &j in &requests[i] {
            if is_candidate[i * n + j] {
                continue;
            }
            if remaining > floor {
                keep[i * n + j] = false;
                remaining -= 1;
            }
        }
    }

    let mut pruned = Graph::empty(n);
    for (i, j) in g.edges() {
        let (a, b) = (keep[i * n + j], keep[j * n + i]);
        let retained = match params.symmetrization {
            Symmetrization::Add => a || b,
            Symmetrization::Remove => a && b,
        };
        if retained {
            pruned.add_edge(i, j)?;
        }
    }
    let removed_count = g.edge_count() - pruned.edge_count();
    Ok(PruneOutcome {
        pruned_graph: pruned,
        candidates,
        removed_count,
        estimates_exchanged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::erdos_renyi;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn key(cycle: u64) -> PruneStream {
        PruneStream::new(42, stream::purpose::PRUNE_X, cycle)
    }

    fn normal_states(n: usize, d: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Matrix::from_fn(n, d, |_, _| rng.sample(StandardNormal))
    }

    #[test]
    fn dissimilarity_examples() {
        let v = [0.3, -2.0, 5.0];
        assert_eq!(dissimilarity(&v, &v).unwrap(), 0.0);
        assert_eq!(dissimilarity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 2.0);
        assert_eq!(dissimilarity(&[0.5, -1.5], &[1.0, 1.0]).unwrap(), 3.0);
        assert!(matches!(
            dissimilarity(&[1.0], &[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn params_validation() {
        assert!(PruneParams::uniform(3, 0.75, 0.25, Beta::Finite(1.0)).is_ok());
        assert!(PruneParams::uniform(3, 0.75, 0.3, Beta::Finite(1.0)).is_err());
        assert!(PruneParams::uniform(3, 1.2, 0.0, Beta::Finite(1.0)).is_err());
        assert!(PruneParams::uniform(3, 0.5, 0.0, Beta::Finite(-1.0)).is_err());
        assert!(PruneParams::new(vec![0.5; 3], vec![0.0; 2], Beta::Greedy).is_err());
        assert_eq!("greedy".parse::<Beta>().unwrap(), Beta::Greedy);
        assert_eq!("10".parse::<Beta>().unwrap(), Beta::Finite(10.0));
        let json = serde_json::to_string(&Beta::Greedy).unwrap();
        assert_eq!(serde_json::from_str::<Beta>(&json).unwrap(), Beta::Greedy);
        assert_eq!(serde_json::from_str::<Beta>("1.5").unwrap(), Beta::Finite(1.5));
    }

    #[test]
    fn budgets_use_floor_and_ceiling() {
        let p = PruneParams::uniform(1, 0.29, 0.29, Beta::Greedy).unwrap();
        assert_eq!(p.budget(0, 100), 29);
        assert_eq!(p.floor_count(0, 100), 29);
        assert_eq!(p.budget(0, 3), 0);
        assert_eq!(p.floor_count(0, 3), 1);
    }

    #[test]
    fn keep_one_neighbor_floor_is_one() {
        let g = erdos_renyi(30, 0.3, 1);
        let p = PruneParams::keep_one_neighbor(&g, 0.75, Beta::Finite(1.0)).unwrap();
        for i in 0..30 {
            if g.degree(i) > 0 {
                assert_eq!(p.floor_count(i, g.degree(i)), 1);
            }
        }
    }

    #[test]
    fn zero_budget_selects_nothing() {
        let g = Graph::complete(5);
        let p = PruneParams::disabled(5);
        let x = normal_states(5, 3, 0);
        assert!(select_candidates(0, &x, &g, &p, &key(0)).is_empty());
    }

    #[test]
    fn greedy_picks_smallest_dissimilarity() {
        // node 0 with neighbors {2, 3, 4} at L1 distances {0.1, 0.5, 0.9}
        let g = Graph::from_edges(5, &[(0, 2), (0, 3), (0, 4)]).unwrap();
        let x = Matrix::from_rows(&[vec![0.0], vec![7.0], vec![0.1], vec![-0.5], vec![0.9]]).unwrap();
        let p = PruneParams::new(vec![2.0 / 3.0, 0.0, 0.0, 0.0, 0.0], vec![0.0; 5], Beta::Greedy).unwrap();
        let mut picked = select_candidates(0, &x, &g, &p, &key(0));
        picked.sort_unstable();
        assert_eq!(picked, vec![2, 3]);
    }

    #[test]
    fn greedy_breaks_ties_by_index() {
        let g = Graph::complete(4);
        let x = Matrix::zeros(4, 2);
        let p = PruneParams::uniform(4, 2.0 / 3.0, 0.0, Beta::Greedy).unwrap();
        assert_eq!(select_candidates(3, &x, &g, &p, &key(0)), vec![0, 1]);
    }

    #[test]
    fn zero_beta_is_uniform_over_subsets() {
        // 4 neighbors, budget 2: six equiprobable subsets.
        let g = Graph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        let x = normal_states(5, 3, 9);
        let p = PruneParams::new(vec![0.5, 0.0, 0.0, 0.0, 0.0], vec![0.0; 5], Beta::Finite(0.0)).unwrap();
        let trials = 100_000u64;
        let mut counts = std::collections::BTreeMap::new();
        for t in 0..trials {
            let mut s = select_candidates(0, &x, &g, &p, &key(t));
            s.sort_unstable();
            *counts.entry(s).or_insert(0u64) += 1;
        }
        assert_eq!(counts.len(), 6);
        let expected = trials as f64 / 6.0;
        let se = (trials as f64 * (1.0 / 6.0) * (5.0 / 6.0)).sqrt();
        let mut chi2 = 0.0;
        for &c in counts.values() {
            assert!((c as f64 - expected).abs() < 3.0 * se, "{counts:?}");
            chi2 += (c as f64 - expected).powi(2) / expected;
        }
        // chi-square with 5 degrees of freedom, 99.9th percentile
        assert!(chi2 < 20.52, "chi2 = {chi2}");
    }

    #[test]
    fn softmax_first_draw_is_monotone_in_dissimilarity() {
        let pool = [(0, 0.2), (1, 0.5), (2, 1.0)];
        let beta = 2.0;
        let trials = 60_000;
        let mut counts = [0usize; 3];
        for t in 0..trials {
            let u: f64 = stream::substream(5, &[t]).random();
            counts[softmax_pick(&pool, beta, u)] += 1;
        }
        assert!(counts[0] > counts[1] && counts[1] > counts[2], "{counts:?}");
        let z: f64 = pool.iter().map(|&(_, d)| (-beta * d).exp()).sum();
        for (k, &(_, d)) in pool.iter().enumerate() {
            let p = (-beta * d).exp() / z;
            let freq = counts[k] as f64 / trials as f64;
            assert!((freq - p).abs() < 4.0 * (p * (1.0 - p) / trials as f64).sqrt());
        }
    }

    #[test]
    fn softmax_ignores_far_tails() {
        let pool = [(0, 0.0), (1, 1000.0)];
        for u in [0.0, 0.5, 0.999_999] {
            assert_eq!(softmax_pick(&pool, 1.0, u), 0);
        }
    }

    #[test]
    fn disabled_pruning_is_identity() {
        let g = erdos_renyi(20, 0.4, 3);
        let x = normal_states(20, 4, 1);
        let out = execute_pruning(&g, &x, &PruneParams::disabled(20), &key(0)).unwrap();
        assert_eq!(out.pruned_graph, g);
        assert_eq!(out.removed_count, 0);
        assert_eq!(out.estimates_exchanged, 0);
    }

    #[test]
    fn mutual_selection_removes_the_edge() {
        let g = Graph::path(2);
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        let p = PruneParams::uniform(2, 1.0, 0.0, Beta::Finite(1.0)).unwrap();
        let out = execute_pruning(&g, &x, &p, &key(0)).unwrap();
        assert_eq!(out.pruned_graph.edge_count(), 0);
        assert_eq!(out.removed_count, 1);
    }

    #[test]
    fn floor_blocks_request_and_add_restores_edge() {
        let g = Graph::complete(3);
        let x = Matrix::from_rows(&[vec![0.0], vec![0.1], vec![5.0]]).unwrap();
        let p = PruneParams::new(vec![0.5, 0.0, 0.0], vec![0.0, 1.0, 0.0], Beta::Greedy).unwrap();
        let out = execute_pruning(&g, &x, &p, &key(0)).unwrap();
        assert_eq!(out.candidates[0], vec![1]);
        assert_eq!(out.pruned_graph, g);

        // with REMOVE the one-sided edge disappears instead
        let out = execute_pruning(&g, &x, &p.with_symmetrization(Symmetrization::Remove), &key(0)).unwrap();
        assert!(!out.pruned_graph.has_edge(0, 1));
        assert_eq!(out.pruned_graph.edge_count(), 2);
    }

    #[test]
    fn requests_are_honoured_in_requester_order() {
        // Node 0 has four neighbors and a floor of 3: only the first request
        // (from node 1) can be honoured, node 2's is refused.
        let g = Graph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0], vec![3.0], vec![4.0]]).unwrap();
        let p = PruneParams::new(
            vec![0.0, 1.0, 1.0, 0.0, 0.0],
            vec![0.75, 0.0, 0.0, 0.0, 0.0],
            Beta::Greedy,
        )
        .unwrap();
        let out = execute_pruning(&g, &x, &p.clone().with_symmetrization(Symmetrization::Remove), &key(0)).unwrap();
        assert!(!out.pruned_graph.has_edge(0, 1));
        assert!(!out.pruned_graph.has_edge(0, 2));
        // under ADD node 0 still holds (0, 2) and restores it
        let out = execute_pruning(&g, &x, &p, &key(0)).unwrap();
        assert!(!out.pruned_graph.has_edge(0, 1));
        assert!(out.pruned_graph.has_edge(0, 2));
    }

    #[test]
    fn outcome_json_lists_edge_sets() {
        let g = Graph::complete(3);
        let x = Matrix::zeros(3, 1);
        let out = execute_pruning(&g, &x, &PruneParams::disabled(3), &key(0)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out.to_json().unwrap()).unwrap();
        assert_eq!(v["edge_sets"][0], serde_json::json!([1, 2]));
        assert_eq!(v["removed_count"], 0);
    }

    proptest! {
        #[test]
        fn pruning_invariants(
            n in 2usize..24,
            p in 0.2f64..1.0,
            kappa in 0.0f64..1.0,
            beta in prop_oneof![Just(Beta::Greedy), (0.0f64..20.0).prop_map(Beta::Finite)],
            seed: u64,
            cycle in 0u64..50,
        ) {
            let g = erdos_renyi(n, p, seed);
            let x = normal_states(n, 3, seed ^ 1);
            let params = PruneParams::keep_one_neighbor(&g, kappa, beta).unwrap();
            let k = PruneStream::new(seed, stream::purpose::PRUNE_X, cycle);
            let out = execute_pruning(&g, &x, &params, &k).unwrap();
            prop_assert!(out.pruned_graph.is_subgraph_of(&g));
            for i in 0..n {
                let c = &out.candidates[i];
                prop_assert_eq!(c.len(), params.budget(i, g.degree(i)));
                let mut sorted = c.clone();
                sorted.sort_unstable();
                sorted.dedup();
                prop_assert_eq!(sorted.len(), c.len());
                prop_assert!(c.iter().all(|&j| g.has_edge(i, j)));
            }
            prop_assert_eq!(out.removed_count, g.edge_count() - out.pruned_graph.edge_count());
            // same inputs, same outcome
            prop_assert_eq!(&execute_pruning(&g, &x, &params, &k).unwrap(), &out);
        }
    }
}
