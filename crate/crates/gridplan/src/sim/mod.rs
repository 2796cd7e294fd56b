//! Plan evaluation and risk/reliability metrics: exact CVaR of discrete
//! distributions, the closed-form per-scenario plan evaluator, the
//! out-of-sample Monte Carlo simulator, and deterministic extreme-event
//! replay.

mod evaluate;
mod monte_carlo;
mod replay;

pub use evaluate::{evaluate_plan, InvestmentPlan, PlanLosses};
pub use monte_carlo::{annual_trace, run_monte_carlo, AnnualTrace, Histogram, McOptions, MetricReport};
pub use replay::{extreme_event_replay, ReplayResult};

use crate::error::{Error, Result};

/// CVaR of a discrete loss distribution at level `alpha` (the tail holds
/// probability `1 - alpha`). Exact: samples are sorted by value and the
/// boundary atom is split so the averaged tail mass is exactly `1 - alpha`.
/// `alpha = 0` gives the plain expectation.
pub fn cvar(samples: &[(f64, f64)], alpha: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Validation(vec!["cvar of an empty sample".into()]));
    }
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::Validation(vec![format!(
            "cvar alpha {alpha} outside [0,1)"
        )]));
    }
    let mut total = 0.0;
    for &(v, p) in samples {
        if !v.is_finite() || !p.is_finite() || p < 0.0 {
            return Err(Error::Validation(vec![format!(
                "bad cvar sample ({v}, {p})"
            )]));
        }
        total += p;
    }
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Validation(vec![format!(
            "cvar probabilities sum to {total}, expected 1"
        )]));
    }
    let mut sorted: Vec<(f64, f64)> = samples.to_vec();
    sorted.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let need = 1.0 - alpha;
    let mut taken = 0.0;
    let mut acc = 0.0;
    for (v, p) in sorted {
        let take = p.min(need - taken);
        acc += v * take;
        taken += take;
        if taken >= need - 1e-15 {
            break;
        }
    }
    Ok(acc / need)
}

/// CVaR over equally likely samples.
pub fn cvar_equal(values: &[f64], alpha: f64) -> Result<f64> {
    let p = 1.0 / values.len() as f64;
    let samples: Vec<(f64, f64)> = values.iter().map(|&v| (v, p)).collect();
    cvar(&samples, alpha)
}
