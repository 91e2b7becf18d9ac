//! HA variant enumeration, monthly TCO under an SLA, and optimum selection.

mod catalog;
mod search;
mod tco;

pub use catalog::{classify_clustered_slots, enumerate_candidates, ChoiceMap, HaOption, OptionCatalog, Slot};
pub use search::{
    check_monotone, optimize, rank_by_penalty, rank_by_tco, Objective, OptimizeOptions, Recommendation, SearchMode,
};
pub use tco::{expected_slippage_hours, slippage_penalty, tco, CandidateEvaluation, SlaContract, HOURS_PER_MONTH};
