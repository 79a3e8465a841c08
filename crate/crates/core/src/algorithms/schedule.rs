use std::collections::VecDeque;

use crate::error::Result;
use crate::graph::{graph_union, is_connected, Graph};
use crate::linalg::Matrix;
use crate::mixing::{metropolis_hastings, spectral_gap, MixingMatrix};
use crate::pruning::{execute_pruning, PruneParams, PruneStream};

/// Graph and weights chosen for one cycle.
pub(crate) struct CycleGraph {
    pub graph: Graph,
    pub mixing: MixingMatrix,
    pub removed: usize,
    pub exchanged: usize,
    pub used_reference: bool,
    pub spectral_gap: Option<f64>,
}

/// Produces the per-cycle graphs of one pruned sequence (x or y).
pub(crate) struct PruneSchedule<'a> {
    reference: &'a Graph,
    params: &'a PruneParams,
    seed: u64,
    purpose: u64,
    refresh_period: Option<usize>,
    track_gap: bool,
    window: VecDeque<Graph>,
}

impl<'a> PruneSchedule<'a> {
    pub fn new(
        reference: &'a Graph,
        params: &'a PruneParams,
        seed: u64,
        purpose: u64,
        refresh_period: Option<usize>,
        track_gap: bool,
    ) -> Self {
        Self {
            reference,
            params,
            seed,
            purpose,
            refresh_period,
            track_gap,
            window: VecDeque::new(),
        }
    }

    pub fn next(&mut self, cycle: usize, estimates: &Matrix) -> Result<CycleGraph> {
        let stream = PruneStream::new(self.seed, self.purpose, cycle as u64);
        let outcome = execute_pruning(self.reference, estimates, self.params, &stream)?;
        let mut graph = outcome.pruned_graph;
        let mut used_reference = false;
        if let Some(r) = self.refresh_period {
            while self.window.len() >= r {
                self.window.pop_front();
            }
            let covered = self.window.len() + 1 < r || {
                let union = graph_union(self.window.iter().chain(std::iter::once(&graph)))?;
                is_connected(&union)
            };
            if !covered && graph != *self.reference {
                graph = self.reference.clone();
                used_reference = true;
            }
            self.window.push_back(graph.clone());
        }
        let removed = self.reference.edge_count() - graph.edge_count();
        let mixing = metropolis_hastings(&graph);
        let spectral_gap = if self.track_gap {
            Some(spectral_gap(mixing.matrix())?)
        } else {
            None
        };
        Ok(CycleGraph {
            graph,
            mixing,
            removed,
            exchanged: outcome.estimates_exchanged,
            used_reference,
            spectral_gap,
        })
    }
}
