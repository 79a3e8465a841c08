//! Checks of the convergence guarantees and the fixed-budget comparison.

pub mod budget;
pub mod envelope;
pub mod step_size;

pub use budget::{budget_comparison, budget_comparison_with, BudgetReport};
pub use envelope::{
    check_connectivity_window, measure_tau_bar, consensus_envelope, EnvelopeParams, EnvelopeReport, EnvelopeRow,
};
pub use step_size::{compute_rho_prime, eta_multiplier, suggest_step_size, StepSizeInputs, StepSizeReport};
