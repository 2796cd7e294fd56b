//! MILP builders for the planning problem.
//!
//! [`full`] carries network operation variables for every outage scenario
//! (the conventional scenario-based model, which grows fast and exists
//! mainly as the baseline); [`scalable`] prices post-failure loss of load
//! through the pre-enumerated island catalog instead, so network variables
//! appear only for the no-failure base case.

pub mod full;
pub mod scalable;

pub use full::{build_full_model, FullInstance};
pub use scalable::{build_scalable_model, decode_solution, PlanOutcome, ScalableInstance};

use crate::model::NetworkTopology;

/// Loss window of an outage starting at period `t` (0-based) with duration
/// parameter `k`: periods `t ..= min(t + k, last)`, truncated at the day
/// boundary, never wrapping.
pub(crate) fn outage_window(t: usize, k: usize, periods: usize) -> std::ops::RangeInclusive<usize> {
    t..=(t + k).min(periods - 1)
}

/// Sum of load factors over an outage window.
pub(crate) fn window_load_factor(
    topology: &NetworkTopology,
    t: usize,
    d: usize,
    k: usize,
) -> f64 {
    outage_window(t, k, topology.periods())
        .map(|tau| topology.typical_days[d].load_factor[tau])
        .sum()
}
