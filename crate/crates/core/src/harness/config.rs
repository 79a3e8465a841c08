use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::algorithms::{Algorithm, Tau};
use crate::error::{Error, Result};
use crate::pruning::Beta;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Consensus,
    Linreg,
    Logreg,
    Budget,
}

impl Scenario {
    pub fn default_algorithm(self) -> Algorithm {
        match self {
            Scenario::Consensus | Scenario::Budget => Algorithm::Ac,
            Scenario::Linreg | Scenario::Logreg => Algorithm::Acgt,
        }
    }
}

/// Erdős–Rényi graphs `G(n, p)`; trial `t` uses `seeds[t % seeds.len()]`,
/// or seed `t` when the list is empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub n: usize,
    pub p: f64,
    #[serde(default)]
    pub seeds: Vec<u64>,
}

impl GraphSpec {
    pub fn seed_for(&self, trial: usize) -> u64 {
        if self.seeds.is_empty() {
            trial as u64
        } else {
            self.seeds[trial % self.seeds.len()]
        }
    }
}

/// Data for the optimization scenarios: a CSV file, or synthetic data when
/// `data` is unset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProblemSpec {
    pub data: Option<PathBuf>,
    pub label_col: String,
    pub normalize: bool,
    pub samples: usize,
    pub dim: usize,
    pub noise: f64,
    pub lambda: f64,
    pub seed: u64,
}

impl Default for ProblemSpec {
    fn default() -> Self {
        Self {
            data: None,
            label_col: "label".into(),
            normalize: true,
            samples: 3200,
            dim: 10,
            noise: 0.1,
            lambda: 0.0,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSpec {
    pub bits: u64,
    #[serde(default = "default_bits_per_vector")]
    pub bits_per_vector: u64,
}

fn default_bits_per_vector() -> u64 {
    64 * 10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    /// Defaults to AC for consensus and budget, AC-GT for regression.
    #[serde(default)]
    pub algorithms: Vec<Algorithm>,
    pub graph: GraphSpec,
    #[serde(default = "default_kappa")]
    pub kappa: Vec<f64>,
    #[serde(default = "default_tau")]
    pub tau: Vec<Tau>,
    #[serde(default = "default_beta")]
    pub beta: Vec<Beta>,
    #[serde(default = "default_alpha")]
    pub alpha: Vec<f64>,
    /// Pick one α per grid point by grid search instead of sweeping α.
    #[serde(default)]
    pub tune_alpha: bool,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    /// Columns of the consensus states.
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub refresh_period: Option<usize>,
    #[serde(default = "default_true")]
    pub count_pruning_overhead: bool,
    #[serde(default)]
    pub shared_prune: bool,
    #[serde(default = "default_true")]
    pub track_spectral_gap: bool,
    #[serde(default)]
    pub problem: ProblemSpec,
    #[serde(default)]
    pub budget: Option<BudgetSpec>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default)]
    pub traces: bool,
    #[serde(default)]
    pub jobs: Option<usize>,
}

fn default_kappa() -> Vec<f64> {
    vec![0.0]
}
fn default_tau() -> Vec<Tau> {
    vec![Tau::Finite(10)]
}
fn default_beta() -> Vec<Beta> {
    vec![Beta::Finite(1.0)]
}
fn default_alpha() -> Vec<f64> {
    vec![0.1]
}
fn default_trials() -> usize {
    20
}
fn default_tolerance() -> f64 {
    1e-10
}
fn default_max_iters() -> usize {
    5000
}
fn default_dim() -> usize {
    10
}
fn default_true() -> bool {
    true
}
fn default_output() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    /// Minimal config for `scenario` on `G(n, p)` with every other field at
    /// its default.
    pub fn new(scenario: Scenario, n: usize, p: f64) -> Self {
        Self {
            scenario,
            algorithms: Vec::new(),
            graph: GraphSpec { n, p, seeds: Vec::new() },
            kappa: default_kappa(),
            tau: default_tau(),
            beta: default_beta(),
            alpha: default_alpha(),
            tune_alpha: false,
            trials: default_trials(),
            tolerance: default_tolerance(),
            max_iters: default_max_iters(),
            dim: default_dim(),
            seed: 0,
            refresh_period: None,
            count_pruning_overhead: true,
            shared_prune: false,
            track_spectral_gap: true,
            problem: ProblemSpec::default(),
            budget: None,
            output: default_output(),
            traces: false,
            jobs: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn algorithms(&self) -> Vec<Algorithm> {
        if self.algorithms.is_empty() {
            vec![self.scenario.default_algorithm()]
        } else {
            self.algorithms.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.kappa.is_empty() || self.tau.is_empty() || self.beta.is_empty() || self.alpha.is_empty() {
            return bad("sweep grids must be nonempty".into());
        }
        if self.trials == 0 {
            return bad("trials must be >= 1".into());
        }
        if self.graph.n == 0 || !(0.0..=1.0).contains(&self.graph.p) {
            return bad(format!("bad graph G({}, {})", self.graph.n, self.graph.p));
        }
        if let Some(k) = self.kappa.iter().find(|k| !(0.0..1.0).contains(*k)) {
            return bad(format!("kappa {k} outside [0, 1)"));
        }
        if let Some(a) = self.alpha.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
            return bad(format!("step size {a} must be > 0"));
        }
        if !(self.tolerance >= 0.0) || self.dim == 0 || self.max_iters == 0 {
            return bad("tolerance >= 0, dim >= 1 and max_iters >= 1 required".into());
        }
        if self.jobs == Some(0) || self.refresh_period == Some(0) {
            return bad("jobs and refresh_period must be >= 1".into());
        }
        let opt = matches!(self.scenario, Scenario::Linreg | Scenario::Logreg);
        if let Some(a) = self.algorithms().iter().find(|a| a.is_optimization() != opt) {
            return bad(format!("algorithm {a:?} does not fit scenario {:?}", self.scenario));
        }
        if self.scenario == Scenario::Budget && self.budget.is_none() {
            return bad("budget scenario needs a budget section".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_defaults() {
        let cfg = ExperimentConfig::from_json(
            r#"{"scenario": "consensus", "graph": {"n": 16, "p": 0.5},
                "kappa": [0.0, 0.5], "tau": [1, "inf"], "beta": [0, "greedy"]}"#,
        )
        .unwrap();
        assert_eq!(cfg.tau, vec![Tau::Finite(1), Tau::Infinite]);
        assert_eq!(cfg.beta, vec![Beta::Finite(0.0), Beta::Greedy]);
        assert_eq!(cfg.trials, 20);
        assert_eq!(cfg.algorithms(), vec![Algorithm::Ac]);
        assert_eq!(cfg.graph.seed_for(3), 3);
    }

    #[test]
    fn rejects_invalid() {
        for text in [
            r#"{"scenario": "consensus", "graph": {"n": 16, "p": 0.5}, "kappa": []}"#,
            r#"{"scenario": "consensus", "graph": {"n": 16, "p": 0.5}, "trials": 0}"#,
            r#"{"scenario": "consensus", "graph": {"n": 16, "p": 1.5}}"#,
            r#"{"scenario": "consensus", "graph": {"n": 16, "p": 0.5}, "kappa": [1.0]}"#,
            r#"{"scenario": "linreg", "graph": {"n": 16, "p": 0.5}, "algorithms": ["ac"]}"#,
            r#"{"scenario": "budget", "graph": {"n": 16, "p": 0.5}}"#,
            r#"{"scenario": "consensus", "graph": {"n": 16, "p": 0.5}, "bogus": 1}"#,
        ] {
            assert!(ExperimentConfig::from_json(text).is_err(), "{text}");
        }
    }

    #[test]
    fn round_trips() {
        let mut cfg = ExperimentConfig::new(Scenario::Budget, 8, 0.4);
        cfg.budget = Some(BudgetSpec { bits: 1000, bits_per_vector: 64 });
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
    }
}
