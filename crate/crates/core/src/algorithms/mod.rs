//! Iteration engines: adaptive consensus, adaptive-consensus gradient
//! tracking, and the fixed-graph baselines.

mod consensus;
mod schedule;
mod trace;
mod tracking;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use consensus::{ac_run, dist_avg_run, random_gossip_run};
pub use trace::{CycleRecord, RunStatus, RunTrace, TraceRow, TRACE_HEADER};
pub use tracking::{acgt_run, gta_run};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::Matrix;
use crate::problems::Objective;
use crate::pruning::PruneParams;

/// Optimality or consensus error above which a run counts as diverged.
pub const DIVERGENCE_THRESHOLD: f64 = 1e10;

/// Cycle length between pruning events.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TauRepr", into = "TauRepr")]
pub enum Tau {
    Finite(usize),
    /// Prune once, at `k = 0`.
    Infinite,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum TauRepr {
    Number(usize),
    Text(String),
}

impl TryFrom<TauRepr> for Tau {
    type Error = Error;

    fn try_from(r: TauRepr) -> Result<Self> {
        match r {
            TauRepr::Number(t) => Tau::finite(t),
            TauRepr::Text(s) => s.parse(),
        }
    }
}

impl From<Tau> for TauRepr {
    fn from(t: Tau) -> Self {
        match t {
            Tau::Finite(v) => TauRepr::Number(v),
            Tau::Infinite => TauRepr::Text("inf".into()),
        }
    }
}

impl Tau {
    pub fn finite(t: usize) -> Result<Self> {
        if t == 0 {
            Err(Error::InvalidParameter("tau must be >= 1".into()))
        } else {
            Ok(Tau::Finite(t))
        }
    }

    /// Whether iteration `k` starts a new cycle.
    pub fn is_prune_step(self, k: usize) -> bool {
        match self {
            Tau::Finite(t) => k.is_multiple_of(t),
            Tau::Infinite => k == 0,
        }
    }

    pub fn cycle_of(self, k: usize) -> usize {
        match self {
            Tau::Finite(t) => k / t,
            Tau::Infinite => 0,
        }
    }
}

impl FromStr for Tau {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" => Ok(Tau::Infinite),
            other => other
                .parse::<usize>()
                .map_err(|_| Error::InvalidParameter(format!("bad tau {s:?}")))
                .and_then(Tau::finite),
        }
    }
}

impl fmt::Display for Tau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tau::Finite(t) => write!(f, "{t}"),
            Tau::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Ac,
    Acgt,
    DistAvg,
    RandomGossip,
    Gta,
}

impl Algorithm {
    pub fn is_optimization(self) -> bool {
        matches!(self, Algorithm::Acgt | Algorithm::Gta)
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "ac" => Ok(Algorithm::Ac),
            "acgt" | "ac_gt" => Ok(Algorithm::Acgt),
            "dist_avg" | "distavg" => Ok(Algorithm::DistAvg),
            "random_gossip" | "gossip" => Ok(Algorithm::RandomGossip),
            "gta" | "gt" => Ok(Algorithm::Gta),
            _ => Err(Error::InvalidParameter(format!("unknown algorithm {s:?}"))),
        }
    }
}

/// Communication counters. One unit of volume is one d-dimensional vector
/// sent over one directed edge.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommLedger {
    pub volume: u64,
    pub rounds: u64,
    pub pruning_overhead_counted: bool,
}

impl CommLedger {
    pub fn new(pruning_overhead_counted: bool) -> Self {
        Self {
            volume: 0,
            rounds: 0,
            pruning_overhead_counted,
        }
    }

    pub fn add_round(&mut self, volume: usize) {
        self.volume += volume as u64;
        self.rounds += 1;
    }

    /// Estimate exchange of a pruning event; free when not counted or when
    /// no node had anything to prune.
    pub fn add_pruning(&mut self, exchanged: usize) {
        if self.pruning_overhead_counted && exchanged > 0 {
            self.add_round(exchanged);
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub graph: Graph,
    pub prune: PruneParams,
    pub tau: Tau,
    pub alpha: f64,
    /// Reuse the x-pruned graph for the tracker instead of pruning on y.
    pub shared_prune: bool,
    /// Window `R` within which the union of cycle graphs must stay
    /// connected; a cycle falls back to the reference graph otherwise.
    pub refresh_period: Option<usize>,
    pub max_iters: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub count_pruning_overhead: bool,
    pub track_spectral_gap: bool,
    pub record_matrices: bool,
}

impl RunConfig {
    pub fn new(algorithm: Algorithm, graph: Graph) -> Self {
        let n = graph.node_count();
        Self {
            algorithm,
            graph,
            prune: PruneParams::disabled(n),
            tau: Tau::Infinite,
            alpha: 0.0,
            shared_prune: false,
            refresh_period: None,
            max_iters: 1000,
            seed: 0,
            tolerance: 1e-10,
            count_pruning_overhead: true,
            track_spectral_gap: false,
            record_matrices: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.graph.node_count();
        if self.prune.n() != n {
            return Err(Error::NodeCountMismatch {
                expected: n,
                found: self.prune.n(),
            });
        }
        self.prune.validate()?;
        if self.algorithm.is_optimization() && !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("step size {} must be > 0", self.alpha)));
        }
        if self.refresh_period == Some(0) {
            return Err(Error::InvalidParameter("refresh period must be >= 1".into()));
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance {} < 0", self.tolerance)));
        }
        Ok(())
    }

    pub(crate) fn check_states(&self, x0: &Matrix) -> Result<()> {
        self.validate()?;
        if x0.rows() != self.graph.node_count() {
            return Err(Error::NodeCountMismatch {
                expected: self.graph.node_count(),
                found: x0.rows(),
            });
        }
        if !x0.data().iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter("initial states must be finite".into()));
        }
        Ok(())
    }
}

/// Runs whichever algorithm `cfg` names. Optimization methods need an
/// objective and, for optimality errors, the optimal value.
pub fn run(cfg: &RunConfig, x0: &Matrix, objective: Option<(&dyn Objective, Option<f64>)>) -> Result<RunTrace> {
    match cfg.algorithm {
        Algorithm::Ac => ac_run(cfg, x0),
        Algorithm::DistAvg => consensus::dist_avg(cfg, x0),
        Algorithm::RandomGossip => consensus::random_gossip(cfg, x0),
        Algorithm::Acgt | Algorithm::Gta => {
            let (obj, f_star) = objective
                .ok_or_else(|| Error::InvalidParameter("optimization run needs an objective".into()))?;
            if cfg.algorithm == Algorithm::Acgt {
                acgt_run(cfg, obj, x0, f_star)
            } else {
                tracking::gta(cfg, obj, x0, f_star)
            }
        }
    }
}
