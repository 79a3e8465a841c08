use rand::Rng;

use super::schedule::PruneSchedule;
use super::{Algorithm, CommLedger, CycleRecord, RunConfig, RunStatus, RunTrace, TraceRow};
use crate::error::Result;
use crate::graph::Graph;
use crate::harness::metrics::{avg_consensus_error, disagreement, row_mean};
use crate::linalg::Matrix;
use crate::mixing::{metropolis_hastings, spectral_gap};
use crate::stream::{self, purpose};

pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn consensus_row(k: usize, g: &Graph, x: &Matrix, mean0: &[f64], ledger: &CommLedger) -> TraceRow {
    TraceRow {
        k,
        comm_volume: ledger.volume,
        comm_rounds: ledger.rounds,
        consensus_error: avg_consensus_error(g, x),
        optimality_error: None,
        spectral_gap: None,
        disagreement: disagreement(x),
        mean_drift: max_abs_diff(&row_mean(x), mean0),
        tracking_gap: None,
    }
}

/// Adaptive consensus: prune at every multiple of `τ`, then average with
/// Metropolis-Hastings weights on the pruned graph until the next event.
pub fn ac_run(cfg: &RunConfig, x0: &Matrix) -> Result<RunTrace> {
    cfg.check_states(x0)?;
    let mut schedule = PruneSchedule::new(
        &cfg.graph,
        &cfg.prune,
        cfg.seed,
        purpose::PRUNE_X,
        cfg.refresh_period,
        cfg.track_spectral_gap,
    );
    let mean0 = row_mean(x0);
    let mut ledger = CommLedger::new(cfg.count_pruning_overhead);
    let mut x = x0.clone();
    let mut rows = Vec::new();
    let mut cycles: Vec<CycleRecord> = Vec::new();
    let mut current = None;
    let mut status = RunStatus::MaxIters;

    for k in 0..=cfg.max_iters {
        let row = consensus_row(k, &cfg.graph, &x, &mean0, &ledger);
        let done = row.consensus_error <= cfg.tolerance;
        rows.push(row);
        if done {
            status = RunStatus::Converged;
            break;
        }
        if k == cfg.max_iters {
            break;
        }
        if cfg.tau.is_prune_step(k) {
            let cycle = schedule.next(cfg.tau.cycle_of(k), &x)?;
            ledger.add_pruning(cycle.exchanged);
            cycles.push(CycleRecord {
                start: k,
                graph: cycle.graph.clone(),
                y_graph: None,
                removed: cycle.removed,
                used_reference: cycle.used_reference,
                spectral_gap: cycle.spectral_gap,
                matrix: cfg.record_matrices.then(|| cycle.mixing.matrix().clone()),
                y_matrix: None,
            });
            current = Some(cycle);
        }
        let cycle = current.as_ref().expect("k = 0 always starts a cycle");
        rows.last_mut().expect("row pushed above").spectral_gap = cycle.spectral_gap;
        x = cycle.mixing.mix(&x);
        ledger.add_round(2 * cycle.graph.edge_count());
    }

    Ok(RunTrace {
        rows,
        cycles,
        status,
        ledger,
        final_x: x,
        final_y: None,
    })
}

/// Plain distributed averaging `x_{k+1} = Q x_k` on the reference graph.
pub fn dist_avg_run(graph: &Graph, x0: &Matrix, max_iters: usize, tolerance: f64) -> Result<RunTrace> {
    let mut cfg = RunConfig::new(Algorithm::DistAvg, graph.clone());
    cfg.max_iters = max_iters;
    cfg.tolerance = tolerance;
    dist_avg(&cfg, x0)
}

pub(crate) fn dist_avg(cfg: &RunConfig, x0: &Matrix) -> Result<RunTrace> {
    cfg.check_states(x0)?;
    let g = &cfg.graph;
    let q = metropolis_hastings(g);
    let gap = if cfg.track_spectral_gap {
        Some(spectral_gap(q.matrix())?)
    } else {
        None
    };
    let cycles = vec![CycleRecord {
        start: 0,
        graph: g.clone(),
        y_graph: None,
        removed: 0,
        used_reference: true,
        spectral_gap: gap,
        matrix: cfg.record_matrices.then(|| q.matrix().clone()),
        y_matrix: None,
    }];
    let mean0 = row_mean(x0);
    let mut ledger = CommLedger::new(cfg.count_pruning_overhead);
    let mut x = x0.clone();
    let mut rows = Vec::new();
    let mut status = RunStatus::MaxIters;
    for k in 0..=cfg.max_iters {
        let mut row = consensus_row(k, g, &x, &mean0, &ledger);
        if row.consensus_error <= cfg.tolerance {
            rows.push(row);
            status = RunStatus::Converged;
            break;
        }
        if k == cfg.max_iters {
            rows.push(row);
            break;
        }
        row.spectral_gap = gap;
        rows.push(row);
        x = q.mix(&x);
        ledger.add_round(2 * g.edge_count());
    }
    Ok(RunTrace {
        rows,
        cycles,
        status,
        ledger,
        final_x: x,
        final_y: None,
    })
}

/// Uniform random-edge gossip: each round one edge is drawn and both
/// endpoints replace their states with the pair average.
pub fn random_gossip_run(graph: &Graph, x0: &Matrix, max_iters: usize, tolerance: f64, seed: u64) -> Result<RunTrace> {
    let mut cfg = RunConfig::new(Algorithm::RandomGossip, graph.clone());
    cfg.max_iters = max_iters;
    cfg.tolerance = tolerance;
    cfg.seed = seed;
    random_gossip(&cfg, x0)
}

pub(crate) fn random_gossip(cfg: &RunConfig, x0: &Matrix) -> Result<RunTrace> {
    cfg.check_states(x0)?;
    let g = &cfg.graph;
    let edges = g.edges();
    let mean0 = row_mean(x0);
    let mut ledger = CommLedger::new(cfg.count_pruning_overhead);
    let mut x = x0.clone();
    let mut rows = Vec::new();
    let mut status = RunStatus::MaxIters;
    for k in 0..=cfg.max_iters {
        let row = consensus_row(k, g, &x, &mean0, &ledger);
        let done = row.consensus_error <= cfg.tolerance;
        rows.push(row);
        if done {
            status = RunStatus::Converged;
            break;
        }
        if k == cfg.max_iters || edges.is_empty() {
            break;
        }
        let pick = stream::substream(cfg.seed, &[purpose::GOSSIP, k as u64]).random_range(0..edges.len());
        let (i, j) = edges[pick];
        for c in 0..x.cols() {
            let avg = 0.5 * (x[(i, c)] + x[(j, c)]);
            x[(i, c)] = avg;
            x[(j, c)] = avg;
        }
        ledger.add_round(2);
    }
    Ok(RunTrace {
        rows,
        cycles: vec![CycleRecord {
            start: 0,
            graph: g.clone(),
            y_graph: None,
            removed: 0,
            used_reference: true,
            spectral_gap: None,
            matrix: None,
            y_matrix: None,
        }],
        status,
        ledger,
        final_x: x,
        final_y: None,
    })
}
