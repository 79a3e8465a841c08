use crate::graph::Graph;
use crate::linalg::{norm, Matrix};

/// `(1/|E|) Σ_{(i,j)∈E} ‖x_i - x_j‖₂` over the edges of `g`; zero when `g`
/// has no edges.
pub fn avg_consensus_error(g: &Graph, states: &Matrix) -> f64 {
    let m = g.edge_count();
    if m == 0 {
        return 0.0;
    }
    let mut diff = vec![0.0; states.cols()];
    let mut total = 0.0;
    for i in 0..g.node_count() {
        let xi = states.row(i);
        for &j in g.neighbors(i).iter().filter(|&&j| j > i) {
            for ((d, a), b) in diff.iter_mut().zip(xi).zip(states.row(j)) {
                *d = a - b;
            }
            total += norm(&diff);
        }
    }
    total / m as f64
}

/// Row average `x̄ = (1/n) Σ_i x_i`.
pub fn row_mean(states: &Matrix) -> Vec<f64> {
    let n = states.rows() as f64;
    let mut mean = vec![0.0; states.cols()];
    for row in states.row_iter() {
        crate::linalg::axpy(1.0, row, &mut mean);
    }
    mean.iter_mut().for_each(|v| *v /= n);
    mean
}

/// Frobenius distance `‖x - 1 x̄ᵀ‖` of the states from their average.
pub fn disagreement(states: &Matrix) -> f64 {
    let mean = row_mean(states);
    states
        .row_iter()
        .flat_map(|r| r.iter().zip(&mean).map(|(a, m)| (a - m).powi(2)))
        .sum::<f64>()
        .sqrt()
}
