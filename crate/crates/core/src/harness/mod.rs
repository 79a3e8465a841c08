//! Metrics, experiment configuration and sweeps.

pub mod config;
pub mod metrics;
pub mod sweep;

pub use config::{BudgetSpec, ExperimentConfig, GraphSpec, ProblemSpec, Scenario};
pub use sweep::{run_sweep, step_size_grid_search, GridPoint, GridSearch, RunRecord, SummaryRow, SweepResult};
