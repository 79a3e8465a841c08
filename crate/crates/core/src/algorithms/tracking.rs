use super::consensus::max_abs_diff;
use super::schedule::PruneSchedule;
use super::{Algorithm, CommLedger, CycleRecord, RunConfig, RunStatus, RunTrace, TraceRow, DIVERGENCE_THRESHOLD};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::harness::metrics::{avg_consensus_error, disagreement, row_mean};
use crate::linalg::Matrix;
use crate::mixing::{metropolis_hastings, spectral_gap, MixingMatrix};
use crate::problems::Objective;
use crate::stream::purpose;

const TRACKING_TOL: f64 = 1e-9;

fn local_gradients(obj: &dyn Objective, x: &Matrix) -> Matrix {
    let mut g = Matrix::zeros(x.rows(), x.cols());
    for i in 0..x.rows() {
        obj.local_gradient_into(i, x.row(i), g.row_mut(i));
    }
    g
}

struct TrackingState {
    x: Matrix,
    y: Matrix,
    grads: Matrix,
}

impl TrackingState {
    fn new(obj: &dyn Objective, x0: &Matrix) -> Self {
        let grads = local_gradients(obj, x0);
        Self {
            x: x0.clone(),
            y: grads.clone(),
            grads,
        }
    }

    /// `x⁺ = Q(x - αy)`, `y⁺ = Q̂y + ∇f(x⁺) - ∇f(x)`
    fn step(&mut self, obj: &dyn Objective, q: &MixingMatrix, q_hat: &MixingMatrix, alpha: f64) {
        let mut shifted = self.x.clone();
        for i in 0..shifted.rows() {
            crate::linalg::axpy(-alpha, self.y.row(i), shifted.row_mut(i));
        }
        let x_next = q.mix(&shifted);
        let grads_next = local_gradients(obj, &x_next);
        let mut y_next = q_hat.mix(&self.y);
        for i in 0..y_next.rows() {
            for ((y, gn), g) in y_next.row_mut(i).iter_mut().zip(grads_next.row(i)).zip(self.grads.row(i)) {
                *y += gn - g;
            }
        }
        self.x = x_next;
        self.y = y_next;
        self.grads = grads_next;
    }

    fn row(&self, k: usize, g: &Graph, obj: &dyn Objective, f_star: Option<f64>, mean0: &[f64], ledger: &CommLedger) -> TraceRow {
        let x_bar = row_mean(&self.x);
        let y_bar = row_mean(&self.y);
        let g_bar = row_mean(&self.grads);
        let tracking_gap = max_abs_diff(&y_bar, &g_bar);
        debug_assert!(
            tracking_gap <= TRACKING_TOL * (1.0 + crate::linalg::norm(&g_bar)),
            "tracker drifted from the mean gradient by {tracking_gap:e} at k = {k}"
        );
        TraceRow {
            k,
            comm_volume: ledger.volume,
            comm_rounds: ledger.rounds,
            consensus_error: avg_consensus_error(g, &self.x),
            optimality_error: f_star.map(|fs| obj.value(&x_bar) - fs),
            spectral_gap: None,
            disagreement: disagreement(&self.x),
            mean_drift: max_abs_diff(&x_bar, mean0),
            tracking_gap: Some(tracking_gap),
        }
    }
}

fn check_objective(cfg: &RunConfig, obj: &dyn Objective, x0: &Matrix) -> Result<()> {
    cfg.check_states(x0)?;
    if obj.node_count() != cfg.graph.node_count() {
        return Err(Error::NodeCountMismatch {
            expected: cfg.graph.node_count(),
            found: obj.node_count(),
        });
    }
    if obj.dim() != x0.cols() {
        return Err(Error::DimensionMismatch {
            expected: obj.dim(),
            found: x0.cols(),
        });
    }
    Ok(())
}

/// Returns the terminal status implied by `row`, if any. Without an
/// optimality error only divergence can stop the run.
fn stop_status(row: &TraceRow, tolerance: f64) -> Option<RunStatus> {
    let worst = row.optimality_error.unwrap_or(0.0).max(row.consensus_error);
    if !worst.is_finite() || worst > DIVERGENCE_THRESHOLD {
        Some(RunStatus::Diverged)
    } else if row.optimality_error.is_some_and(|e| e <= tolerance) {
        Some(RunStatus::Converged)
    } else {
        None
    }
}

/// Adaptive-consensus gradient tracking. Stops on optimality error when
/// `f_star` is known, else runs to the iteration cap.
pub fn acgt_run(cfg: &RunConfig, obj: &dyn Objective, x0: &Matrix, f_star: Option<f64>) -> Result<RunTrace> {
    check_objective(cfg, obj, x0)?;
    let track = cfg.track_spectral_gap;
    let mut x_schedule = PruneSchedule::new(&cfg.graph, &cfg.prune, cfg.seed, purpose::PRUNE_X, cfg.refresh_period, track);
    let mut y_schedule = PruneSchedule::new(&cfg.graph, &cfg.prune, cfg.seed, purpose::PRUNE_Y, cfg.refresh_period, track);
    let mean0 = row_mean(x0);
    let mut ledger = CommLedger::new(cfg.count_pruning_overhead);
    let mut state = TrackingState::new(obj, x0);
    let mut rows = Vec::new();
    let mut cycles: Vec<CycleRecord> = Vec::new();
    let mut current = None;
    let mut status = RunStatus::MaxIters;

    for k in 0..=cfg.max_iters {
        let row = state.row(k, &cfg.graph, obj, f_star, &mean0, &ledger);
        let stop = stop_status(&row, cfg.tolerance);
        rows.push(row);
        if let Some(s) = stop {
            status = s;
            break;
        }
        if k == cfg.max_iters {
            break;
        }
        if cfg.tau.is_prune_step(k) {
            let c = cfg.tau.cycle_of(k);
            let xc = x_schedule.next(c, &state.x)?;
            let yc = if cfg.shared_prune {
                None
            } else {
                Some(y_schedule.next(c, &state.y)?)
            };
            let exchanged = xc.exchanged + yc.as_ref().map_or(0, |y| y.exchanged);
            ledger.add_pruning(exchanged);
            cycles.push(CycleRecord {
                start: k,
                graph: xc.graph.clone(),
                y_graph: yc.as_ref().map(|y| y.graph.clone()),
                removed: xc.removed,
                used_reference: xc.used_reference,
                spectral_gap: xc.spectral_gap,
                matrix: cfg.record_matrices.then(|| xc.mixing.matrix().clone()),
                y_matrix: yc.as_ref().filter(|_| cfg.record_matrices).map(|y| y.mixing.matrix().clone()),
            });
            current = Some((xc, yc));
        }
        let (xc, yc) = current.as_ref().expect("k = 0 always starts a cycle");
        let q_hat = yc.as_ref().unwrap_or(xc);
        rows.last_mut().expect("row pushed above").spectral_gap = xc.spectral_gap;
        state.step(obj, &xc.mixing, &q_hat.mixing, cfg.alpha);
        ledger.add_round(2 * xc.graph.edge_count() + 2 * q_hat.graph.edge_count());
    }

    Ok(RunTrace {
        rows,
        cycles,
        status,
        ledger,
        final_x: state.x,
        final_y: Some(state.y),
    })
}

/// Gradient tracking on the fixed reference graph.
pub fn gta_run(
    graph: &Graph,
    obj: &dyn Objective,
    x0: &Matrix,
    alpha: f64,
    max_iters: usize,
    tolerance: f64,
    f_star: Option<f64>,
) -> Result<RunTrace> {
    let mut cfg = RunConfig::new(Algorithm::Gta, graph.clone());
    cfg.alpha = alpha;
    cfg.max_iters = max_iters;
    cfg.tolerance = tolerance;
    gta(&cfg, obj, x0, f_star)
}

pub(crate) fn gta(cfg: &RunConfig, obj: &dyn Objective, x0: &Matrix, f_star: Option<f64>) -> Result<RunTrace> {
    check_objective(cfg, obj, x0)?;
    let g = &cfg.graph;
    let q = metropolis_hastings(g);
    let gap = if cfg.track_spectral_gap {
        Some(spectral_gap(q.matrix())?)
    } else {
        None
    };
    let mean0 = row_mean(x0);
    let mut ledger = CommLedger::new(cfg.count_pruning_overhead);
    let mut state = TrackingState::new(obj, x0);
    let mut rows = Vec::new();
    let mut status = RunStatus::MaxIters;
    for k in 0..=cfg.max_iters {
        let mut row = state.row(k, g, obj, f_star, &mean0, &ledger);
        if let Some(s) = stop_status(&row, cfg.tolerance) {
            rows.push(row);
            status = s;
            break;
        }
        if k == cfg.max_iters {
            rows.push(row);
            break;
        }
        row.spectral_gap = gap;
        rows.push(row);
        state.step(obj, &q, &q, cfg.alpha);
        ledger.add_round(4 * g.edge_count());
    }
    Ok(RunTrace {
        rows,
        cycles: vec![CycleRecord {
            start: 0,
            graph: g.clone(),
            y_graph: None,
            removed: 0,
            used_reference: true,
            spectral_gap: gap,
            matrix: cfg.record_matrices.then(|| q.matrix().clone()),
            y_matrix: None,
        }],
        status,
        ledger,
        final_x: state.x,
        final_y: Some(state.y),
    })
}
