//! Closed-form evaluation of a fixed investment plan over a scenario set.
//!
//! This is the plan-side mirror of the scalable model: for each scenario
//! and start slot, the loss equals the islanded peak demand scaled over
//! the outage window minus the state of charge of islanded storage
//! (profile fraction at the start period for routine outages, full
//! capacity for predicted extreme events), clamped at zero across the
//! state's islands as a whole.

use crate::error::{Error, Result};
use crate::formulation::window_load_factor;
use crate::islanding::IslandCatalog;
use crate::model::{AssetStatus, EconomicParams, NetworkTopology};
use crate::scenario::{ScenarioClass, ScenarioSet};
use crate::sim::cvar;
use crate::soc::SocProfile;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// A fixed investment decision: which candidate lines are built and how
/// much energy each candidate storage site gets.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InvestmentPlan {
    pub built_lines: BTreeSet<String>,
    /// Candidate storage id -> installed energy in kWh.
    pub storage_kwh: BTreeMap<String, f64>,
}

impl InvestmentPlan {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn validate(&self, topology: &NetworkTopology) -> Result<()> {
        let mut bad = Vec::new();
        for id in &self.built_lines {
            match topology.line_index(id) {
                None => bad.push(format!("plan builds unknown line {id}")),
                Some(li) if topology.lines[li].status != AssetStatus::Candidate => {
                    bad.push(format!("plan builds non-candidate line {id}"))
                }
                _ => {}
            }
        }
        for (id, &kwh) in &self.storage_kwh {
            match topology.storage_index(id) {
                None => bad.push(format!("plan sizes unknown storage {id}")),
                Some(hi) => {
                    let h = &topology.storage[hi];
                    if h.status != AssetStatus::Candidate {
                        bad.push(format!("plan sizes non-candidate storage {id}"));
                    } else if !(0.0..=h.max_energy_kwh() + 1e-9).contains(&kwh) {
                        bad.push(format!(
                            "plan sizes storage {id} at {kwh} kWh outside [0, {}]",
                            h.max_energy_kwh()
                        ));
                    }
                }
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(bad))
        }
    }

    /// Installed energy for any device: plan size for candidates,
    /// nameplate for existing units.
    pub fn energy_kwh(&self, topology: &NetworkTopology, hi: usize) -> f64 {
        let h = &topology.storage[hi];
        match h.status {
            AssetStatus::Existing => h.unit_energy_kwh(),
            AssetStatus::Candidate => self.storage_kwh.get(&h.id).copied().unwrap_or(0.0),
        }
    }

    pub fn built_line_indices(&self, topology: &NetworkTopology) -> BTreeSet<usize> {
        self.built_lines
            .iter()
            .filter_map(|id| topology.line_index(id))
            .collect()
    }
}

/// Per-slot losses and their annualized cost aggregates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanLosses {
    /// kWh lost, indexed `[d][t][s]` (scenario 0, the base, is always 0).
    pub per_slot_kwh: Vec<Vec<Vec<f64>>>,
    /// Annual expected loss-of-load, kWh weighted by slot probabilities
    /// and day weights.
    pub expected_kwh: f64,
    /// Sum over slots of the per-slot CVaR, day-weighted, in kWh.
    pub cvar_kwh: f64,
    pub expected_cost_usd: f64,
    pub cvar_cost_usd: f64,
}

/// Evaluate a plan in closed form. `econ` supplies the value of lost
/// load, power factor, and CVaR level (pass a modified copy for sweeps).
pub fn evaluate_plan(
    topology: &NetworkTopology,
    plan: &InvestmentPlan,
    catalog: &IslandCatalog,
    profiles: &SocProfile,
    scenarios: &ScenarioSet,
    econ: &EconomicParams,
) -> Result<PlanLosses> {
    plan.validate(topology)?;
    if catalog.per_state.len() != scenarios.states.len() {
        return Err(Error::Model(format!(
            "island catalog covers {} states, scenario set has {} \
             (catalog/state mismatch signals a relevance-closure bug)",
            catalog.per_state.len(),
            scenarios.states.len()
        )));
    }
    let periods = topology.periods();
    let n_days = topology.typical_days.len();
    let n_scen = scenarios.num_scenarios();
    let delta = topology.delta_hours();
    let built = plan.built_line_indices(topology);

    let mut per_slot = vec![vec![vec![0.0; n_scen]; periods]; n_days];
    for (s, scen) in scenarios.scenarios.iter().enumerate().skip(1) {
        let combo_idx = catalog.combo_for_plan(scen.state, &built);
        let combo = &catalog.per_state[scen.state].combos[combo_idx];
        for d in 0..n_days {
            for t in 0..periods {
                let sum_f = window_load_factor(topology, t, d, scen.duration_periods);
                let mut total = 0.0;
                for island in &combo.islands {
                    total += delta * island.peak_load_kw * sum_f;
                    for &hi in &island.storage {
                        let weight = match scen.class {
                            ScenarioClass::Routine => profiles.get(hi, t, d),
                            ScenarioClass::Resilience => 1.0,
                        };
                        total -= plan.energy_kwh(topology, hi) * weight;
                    }
                }
                per_slot[d][t][s] = total.max(0.0);
            }
        }
    }

    let mut expected_kwh = 0.0;
    let mut cvar_kwh = 0.0;
    for (d, day) in topology.typical_days.iter().enumerate() {
        let w = day.weight_days_per_year;
        for t in 0..periods {
            let dist: Vec<(f64, f64)> = (0..n_scen)
                .map(|s| (per_slot[d][t][s], scenarios.scenarios[s].probability))
                .collect();
            expected_kwh += w * dist.iter().map(|&(v, p)| v * p).sum::<f64>();
            cvar_kwh += w * cvar(&dist, econ.cvar_alpha)?;
        }
    }
    let pf_voll = econ.power_factor * econ.voll_usd_per_kwh;
    Ok(PlanLosses {
        per_slot_kwh: per_slot,
        expected_kwh,
        cvar_kwh,
        expected_cost_usd: pf_voll * expected_kwh,
        cvar_cost_usd: pf_voll * cvar_kwh,
    })
}
