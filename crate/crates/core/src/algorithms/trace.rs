use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::CommLedger;
use crate::error::Result;
use crate::graph::Graph;
use crate::linalg::{format_f64, Matrix};

pub const TRACE_HEADER: [&str; 7] = [
    "k",
    "comm_volume",
    "comm_rounds",
    "consensus_error",
    "optimality_error",
    "spectral_gap",
    "status",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Converged,
    MaxIters,
    Diverged,
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RunStatus::Converged => "converged",
            RunStatus::MaxIters => "max_iters",
            RunStatus::Diverged => "diverged",
        })
    }
}

/// State after `k` iterations and the communication spent to reach it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub k: usize,
    pub comm_volume: u64,
    pub comm_rounds: u64,
    pub consensus_error: f64,
    pub optimality_error: Option<f64>,
    /// Gap of the mixing matrix applied at iteration `k`.
    pub spectral_gap: Option<f64>,
    /// `‖x_k - 1 x̄_kᵀ‖_F`
    pub disagreement: f64,
    /// `max_j |x̄_k[j] - x̄_0[j]|`
    pub mean_drift: f64,
    /// `max_j |ȳ_k[j] - (1/n) Σ_i ∇f_i(x_{i,k})[j]|`
    pub tracking_gap: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    /// First iteration of the cycle.
    pub start: usize,
    pub graph: Graph,
    pub y_graph: Option<Graph>,
    pub removed: usize,
    pub used_reference: bool,
    pub spectral_gap: Option<f64>,
    pub matrix: Option<Matrix>,
    pub y_matrix: Option<Matrix>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub rows: Vec<TraceRow>,
    pub cycles: Vec<CycleRecord>,
    pub status: RunStatus,
    pub ledger: CommLedger,
    pub final_x: Matrix,
    pub final_y: Option<Matrix>,
}

impl RunTrace {
    /// Number of iterations executed.
    pub fn iterations(&self) -> usize {
        self.rows.last().map_or(0, |r| r.k)
    }

    pub fn last(&self) -> &TraceRow {
        self.rows.last().expect("a trace always holds the initial row")
    }

    pub fn converged(&self) -> bool {
        self.status == RunStatus::Converged
    }

    /// Cycle index in force at iteration `k`.
    pub fn cycle_at(&self, k: usize) -> Option<usize> {
        match self.cycles.partition_point(|c| c.start <= k) {
            0 => None,
            p => Some(p - 1),
        }
    }

    /// Graph used at each executed iteration.
    pub fn iteration_graphs(&self) -> Vec<&Graph> {
        (0..self.iterations())
            .filter_map(|k| self.cycle_at(k).map(|c| &self.cycles[c].graph))
            .collect()
    }

    /// Mixing matrix applied at each executed iteration; `None` unless the
    /// run recorded its matrices.
    pub fn iteration_matrices(&self) -> Option<Vec<&Matrix>> {
        (0..self.iterations())
            .map(|k| self.cycle_at(k).and_then(|c| self.cycles[c].matrix.as_ref()))
            .collect()
    }

    /// Mean spectral gap over the recorded cycles.
    pub fn mean_cycle_gap(&self) -> Option<f64> {
        let gaps: Option<Vec<f64>> = self.cycles.iter().map(|c| c.spectral_gap).collect();
        let gaps = gaps?;
        if gaps.is_empty() {
            None
        } else {
            Some(gaps.iter().sum::<f64>() / gaps.len() as f64)
        }
    }

    /// First row whose optimality error (or consensus error when absent) is
    /// at most `tol`.
    pub fn first_below(&self, tol: f64) -> Option<&TraceRow> {
        self.rows
            .iter()
            .find(|r| r.optimality_error.unwrap_or(r.consensus_error) <= tol)
    }

    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(TRACE_HEADER)?;
        let status = self.status.to_string();
        let opt = |v: Option<f64>| v.map(format_f64).unwrap_or_default();
        for (idx, r) in self.rows.iter().enumerate() {
            let s = if idx + 1 == self.rows.len() { status.as_str() } else { "ok" };
            w.write_record([
                r.k.to_string(),
                r.comm_volume.to_string(),
                r.comm_rounds.to_string(),
                format_f64(r.consensus_error),
                opt(r.optimality_error),
                opt(r.spectral_gap),
                s.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is ASCII"))
    }
}
