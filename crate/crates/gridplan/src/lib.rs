//! Risk-averse expansion planning for power distribution feeders.
//!
//! The crate selects investments in new line segments and storage devices
//! that balance expected loss-of-load cost against its conditional value at
//! risk (CVaR) across routine and extreme outage scenarios. Two model
//! builders are provided: a conventional scenario-based stochastic MILP
//! that carries full network operation per scenario, and a
//! scalability-oriented reformulation that separates outage scenarios from
//! grid failure states and prices loss of load through island peak demand
//! and storage state of charge. A Monte Carlo simulator evaluates any
//! fixed plan out of sample (energy not served, SAIFI, SAIDI).
//!
//! Start with the runnable programs in `examples/`: each one demonstrates
//! a single capability end to end on the bundled toy feeder.

pub mod error;
#[cfg(test)]
pub(crate) mod test_fixtures;
pub mod formulation;
pub mod islanding;
pub mod milp;
pub mod model;
pub mod report;
pub mod scenario;
pub mod sim;
pub mod soc;
pub mod solver;

pub use error::{Error, Result};
pub use model::{
    load_network, save_network, EconomicParams, Line, NetworkFormat, NetworkTopology, Node,
    StorageDevice, TypicalDay,
};
pub use scenario::{FailureState, OutageScenario, ScenarioClass, ScenarioSet};
pub use sim::{cvar, evaluate_plan, InvestmentPlan, MetricReport};
pub use solver::{solve, SolveConfig, SolveResult, SolveStatus, SolverEngine};
