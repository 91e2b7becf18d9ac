//! Independent checks of the closed-form model.

mod exact;
mod simulate;

pub use exact::{exact_breakdown_probability, MAX_EXACT_NODES};
pub use simulate::{simulate_timeline, BreakdownRecovery, SimulationResult, SimulationSpec};
