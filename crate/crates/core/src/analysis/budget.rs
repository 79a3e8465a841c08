use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{is_connected, Graph};
use crate::harness::metrics::avg_consensus_error;
use crate::linalg::Matrix;
use crate::mixing::{metropolis_hastings, spectral_gap};
use crate::pruning::{execute_pruning, Beta, PruneParams, PruneStream};
use crate::stream::purpose;

/// Softmax temperature of the static prune.
pub const BUDGET_BETA: f64 = 1.0;

/// Fixed-bit-budget comparison of averaging on a graph and on a pruned copy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetReport {
    pub kappa: f64,
    /// Fraction of edges the prune actually removed.
    pub kappa_effective: f64,
    pub budget_bits: u64,
    pub bits_per_vector: u64,
    pub edges: usize,
    pub pruned_edges: usize,
    pub pruned_connected: bool,
    pub iterations: usize,
    pub pruned_iterations: usize,
    /// `T / (1 - κ)` with the nominal κ.
    pub nominal_pruned_iterations: usize,
    pub error: f64,
    pub pruned_error: f64,
    pub gap: f64,
    pub pruned_gap: f64,
}

impl BudgetReport {
    pub fn summary_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Per-iteration errors of both runs as `(k, actual, bound, margin)`
    /// rows, where `actual` is the pruned error and `bound` the reference
    /// error at the same k (carried forward once a run has stopped).
    pub fn write_csv(out: impl Write, reference: &[f64], pruned: &[f64]) -> Result<()> {
        let len = reference.len().max(pruned.len());
        let at = |s: &[f64], k: usize| s.get(k).or(s.last()).copied().unwrap_or(0.0);
        super::envelope::write_margin_csv(
            out,
            (0..len).map(|k| {
                let (a, b) = (at(pruned, k), at(reference, k));
                (k, a, b, if a == 0.0 { f64::INFINITY } else { b / a })
            }),
        )
    }
}

/// Iterations affordable with `budget` bits when each iteration sends
/// `2|E|` vectors of `bits` bits.
pub fn affordable_iterations(budget: u64, bits: u64, edges: usize) -> usize {
    if edges == 0 {
        return 0;
    }
    (budget / (2 * bits * edges as u64)) as usize
}

/// Compares averaging on `reference` against averaging on `pruned` under
/// the same bit budget.
pub fn budget_comparison_with(
    reference: &Graph,
    pruned: &Graph,
    kappa: f64,
    budget_bits: u64,
    bits_per_vector: u64,
    x0: &Matrix,
) -> Result<(BudgetReport, Vec<f64>, Vec<f64>)> {
    if bits_per_vector == 0 {
        return Err(Error::InvalidParameter("bits per vector must be >= 1".into()));
    }
    if !(0.0..1.0).contains(&kappa) {
        return Err(Error::InvalidParameter(format!("kappa {kappa} outside [0, 1)")));
    }
    if !pruned.is_subgraph_of(reference) {
        return Err(Error::InvalidParameter("pruned graph is not a subgraph".into()));
    }
    let edges = reference.edge_count();
    let pruned_edges = pruned.edge_count();
    let iterations = affordable_iterations(budget_bits, bits_per_vector, edges);
    let pruned_iterations = affordable_iterations(budget_bits, bits_per_vector, pruned_edges);
    let nominal = (iterations as f64 / (1.0 - kappa)).floor() as usize;
    let ref_series = error_series(reference, reference, x0, iterations)?;
    let pruned_series = error_series(reference, pruned, x0, pruned_iterations)?;
    let report = BudgetReport {
        kappa,
        kappa_effective: if edges == 0 { 0.0 } else { 1.0 - pruned_edges as f64 / edges as f64 },
        budget_bits,
        bits_per_vector,
        edges,
        pruned_edges,
        pruned_connected: is_connected(pruned),
        iterations,
        pruned_iterations,
        nominal_pruned_iterations: nominal,
        error: *ref_series.last().expect("series holds the initial error"),
        pruned_error: *pruned_series.last().expect("series holds the initial error"),
        gap: spectral_gap(metropolis_hastings(reference).matrix())?,
        pruned_gap: spectral_gap(metropolis_hastings(pruned).matrix())?,
    };
    Ok((report, ref_series, pruned_series))
}

/// Averaging error on `reference`'s edges after each of `t` mixing steps
/// over `g`.
fn error_series(reference: &Graph, g: &Graph, x0: &Matrix, t: usize) -> Result<Vec<f64>> {
    if x0.rows() != reference.node_count() {
        return Err(Error::NodeCountMismatch {
            expected: reference.node_count(),
            found: x0.rows(),
        });
    }
    let q = metropolis_hastings(g);
    let mut x = x0.clone();
    let mut out = Vec::with_capacity(t + 1);
    out.push(avg_consensus_error(reference, &x));
    for _ in 0..t {
        x = q.mix(&x);
        out.push(avg_consensus_error(reference, &x));
    }
    Ok(out)
}

/// Single static prune of `graph` at budget `kappa` (keeping one neighbor
/// per node), then [`budget_comparison_with`].
pub fn budget_comparison(
    graph: &Graph,
    kappa: f64,
    budget_bits: u64,
    bits_per_vector: u64,
    x0: &Matrix,
    seed: u64,
) -> Result<(BudgetReport, Vec<f64>, Vec<f64>)> {
    let params = PruneParams::keep_one_neighbor(graph, kappa, Beta::finite(BUDGET_BETA)?)?;
    let stream = PruneStream::new(seed, purpose::PRUNE_X, 0);
    let outcome = execute_pruning(graph, x0, &params, &stream)?;
    budget_comparison_with(graph, &outcome.pruned_graph, kappa, budget_bits, bits_per_vector, x0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::substream;
    use rand_distr::{Distribution, StandardNormal};

    fn states(n: usize, d: usize, seed: u64) -> Matrix {
        let mut rng = substream(seed, &[purpose::INITIAL_STATE]);
        Matrix::from_fn(n, d, |_, _| StandardNormal.sample(&mut rng))
    }

    #[test]
    fn iteration_counts() {
        assert_eq!(affordable_iterations(6400, 32, 10), 10);
        assert_eq!(affordable_iterations(6399, 32, 10), 9);
        assert_eq!(affordable_iterations(100, 32, 0), 0);
    }

    #[test]
    fn zero_kappa_is_identical() {
        let g = Graph::cycle(8);
        let x0 = states(8, 3, 1);
        let (r, a, b) = budget_comparison(&g, 0.0, 64 * 8 * 40, 64, &x0, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(r.error, r.pruned_error);
        assert_eq!(r.iterations, 20);
        assert_eq!(r.pruned_iterations, 20);
    }

    #[test]
    fn pruning_raises_gap_on_diamond() {
        // Removing the chord of a diamond leaves a 4-cycle with a larger gap.
        let diamond = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)]).unwrap();
        let square = Graph::from_edges(4, &[(0, 2), (0, 3), (1, 2), (1, 3)]).unwrap();
        let x0 = states(4, 2, 3);
        let (r, ..) = budget_comparison_with(&diamond, &square, 0.2, 64 * 2 * 5 * 30, 64, &x0).unwrap();
        assert!((r.gap - 0.5).abs() < 1e-12 && (r.pruned_gap - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!((r.iterations, r.pruned_iterations), (30, 37));
        assert!(r.pruned_error <= r.error, "{} > {}", r.pruned_error, r.error);
    }

    #[test]
    fn flags_disconnected_prune() {
        let g = Graph::path(4);
        let pruned = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        let (r, ..) = budget_comparison_with(&g, &pruned, 0.3, 1000, 10, &states(4, 1, 0)).unwrap();
        assert!(!r.pruned_connected);
        assert!(budget_comparison_with(&pruned, &g, 0.3, 1000, 10, &states(4, 1, 0)).is_err());
    }
}
