//! Convergence measurement and closed-form runtime models of UCT.

mod convergence;
mod fit;
mod models;

pub use convergence::{tau_convergence_point, ConvergenceTrace, DEFAULT_TAU};
pub use fit::{fit_runtime_model, FitReport};
pub use models::{
    catch_up_visits, catch_up_visits_ceil, model_k_step, model_two_step, scenario_a_visits,
    scenario_b_branch_visits, scenario_b_total, CatchUpState, ModelParams,
};
