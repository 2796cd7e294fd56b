//! Outage scenarios and grid failure states.
//!
//! A failure state is a set of simultaneously failed existing lines; an
//! outage scenario points at one state and adds duration, class, and a
//! per-start-slot probability. Scenario index 0 is always the reserved
//! no-failure base scenario, which absorbs the residual probability mass so
//! the per-slot distribution over scenarios sums to one.

use crate::error::{Error, Result};
use crate::model::NetworkTopology;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioClass {
    /// Spontaneous single-asset outage; storage responds with whatever
    /// charge its economic schedule happens to hold.
    Routine,
    /// Predicted extreme event; storage is preventively charged to full
    /// capacity before it hits.
    Resilience,
}

/// A set of simultaneously failed existing lines. State 0 is the reserved
/// empty no-failure state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureState {
    /// Failed existing-line indices, sorted.
    pub failed_lines: Vec<usize>,
}

impl FailureState {
    pub fn is_base(&self) -> bool {
        self.failed_lines.is_empty()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutageScenario {
    /// Index into [`ScenarioSet::states`].
    pub state: usize,
    /// Outage length parameter: starting at period t, the loss window
    /// covers periods t through min(t + duration, last period of the day).
    pub duration_periods: usize,
    pub class: ScenarioClass,
    /// Probability per (period, typical day) start slot.
    pub probability: f64,
}

/// Input description of one scenario, before state deduplication.
#[derive(Debug, Clone)]
pub struct ScenarioSpec {
    pub failed_line_ids: BTreeSet<String>,
    pub duration_periods: usize,
    pub class: ScenarioClass,
    pub probability: f64,
}

/// Immutable scenario collection with the scenario-to-state mapping.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioSet {
    /// Index 0 is the no-failure base scenario.
    pub scenarios: Vec<OutageScenario>,
    /// Index 0 is the empty base state; the rest are sorted by their
    /// failed-line sets for a deterministic catalog order.
    pub states: Vec<FailureState>,
}

impl ScenarioSet {
    /// Assemble a scenario set: deduplicate failure states, verify line
    /// ids, and prepend the base scenario with the residual probability.
    pub fn build(topology: &NetworkTopology, specs: &[ScenarioSpec]) -> Result<Self> {
        let mut resolved: Vec<(Vec<usize>, &ScenarioSpec)> = Vec::with_capacity(specs.len());
        for spec in specs {
            let mut lines = Vec::with_capacity(spec.failed_line_ids.len());
            for id in &spec.failed_line_ids {
                let li = topology.line_index(id).ok_or_else(|| {
                    Error::Validation(vec![format!("scenario references unknown line {id}")])
                })?;
                if topology.lines[li].status != crate::model::AssetStatus::Existing {
                    return Err(Error::Validation(vec![format!(
                        "scenario fails non-existing line {id}"
                    )]));
                }
                lines.push(li);
            }
            lines.sort_unstable();
            if lines.is_empty() {
                return Err(Error::Validation(vec![
                    "scenario with empty failure set; the base scenario is implicit".into(),
                ]));
            }
            if spec.duration_periods < 1 {
                return Err(Error::Validation(vec![
                    "scenario duration must be at least one period".into(),
                ]));
            }
            if spec.probability < 0.0 {
                return Err(Error::Validation(vec![
                    "scenario probability must be non-negative".into(),
                ]));
            }
            resolved.push((lines, spec));
        }

        let mut state_keys: Vec<Vec<usize>> = resolved.iter().map(|(l, _)| l.clone()).collect();
        state_keys.sort();
        state_keys.dedup();
        let mut states = vec![FailureState {
            failed_lines: Vec::new(),
        }];
        let mut state_index: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        for key in state_keys {
            state_index.insert(key.clone(), states.len());
            states.push(FailureState { failed_lines: key });
        }

        let mut total = 0.0;
        let mut scenarios = vec![OutageScenario {
            state: 0,
            duration_periods: 0,
            class: ScenarioClass::Routine,
            probability: 0.0,
        }];
        for (lines, spec) in resolved {
            total += spec.probability;
            scenarios.push(OutageScenario {
                state: state_index[&lines],
                duration_periods: spec.duration_periods,
                class: spec.class,
                probability: spec.probability,
            });
        }
        if total > 1.0 + 1e-12 {
            return Err(Error::Validation(vec![format!(
                "scenario probabilities sum to {total} per start slot, above 1"
            )]));
        }
        if total >= 1.0 - 1e-12 {
            log::warn!(
                "scenario probabilities saturate the per-slot distribution \
                 (sum {total}); the no-failure scenario keeps zero mass"
            );
        }
        scenarios[0].probability = (1.0 - total).max(0.0);
        Ok(ScenarioSet { scenarios, states })
    }

    /// Build scenarios from per-line outage rates plus extreme events.
    ///
    /// Each line with a nonzero annual rate becomes one routine scenario
    /// with duration from its mean time to repair; each extreme event
    /// becomes one scenario of its declared class. Annual rates divide by
    /// the number of (period, day) start slots in a year so that expected
    /// occurrences are preserved when summed over all slots.
    pub fn build_from_rates(
        topology: &NetworkTopology,
        rates: &[OutageRate],
        events: &[ExtremeEvent],
    ) -> Result<Self> {
        let delta = topology.delta_hours();
        let slots_per_year: f64 = topology
            .typical_days
            .iter()
            .map(|d| d.weight_days_per_year * d.periods() as f64)
            .sum();
        if slots_per_year <= 0.0 {
            return Err(Error::Validation(vec![
                "topology has no typical-day slots".into(),
            ]));
        }
        let mut specs = Vec::new();
        for r in rates {
            if r.rate_per_year < 0.0 || (r.rate_per_year > 0.0 && r.mttr_hours <= 0.0) {
                return Err(Error::Validation(vec![format!(
                    "bad outage rate entry for line {}",
                    r.line_id
                )]));
            }
            if r.rate_per_year == 0.0 {
                continue;
            }
            specs.push(ScenarioSpec {
                failed_line_ids: BTreeSet::from([r.line_id.clone()]),
                duration_periods: (r.mttr_hours / delta).ceil().max(1.0) as usize,
                class: ScenarioClass::Routine,
                probability: r.rate_per_year / slots_per_year,
            });
        }
        for ev in events {
            specs.push(ScenarioSpec {
                failed_line_ids: ev.lines.iter().cloned().collect(),
                duration_periods: (ev.duration_hours / delta).ceil().max(1.0) as usize,
                class: ev.class,
                probability: ev.rate_per_year / slots_per_year,
            });
        }
        Self::build(topology, &specs)
    }

    /// The deduplicated failure states; index 0 is the base state.
    pub fn state_catalog(&self) -> &[FailureState] {
        &self.states
    }

    /// Scenario indices grouped per state.
    pub fn scenarios_by_state(&self) -> Vec<Vec<usize>> {
        let mut by_state = vec![Vec::new(); self.states.len()];
        for (si, sc) in self.scenarios.iter().enumerate() {
            by_state[sc.state].push(si);
        }
        by_state
    }

    pub fn num_scenarios(&self) -> usize {
        self.scenarios.len()
    }
}

/// One row of `outage_rates.csv`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutageRate {
    pub line_id: String,
    pub rate_per_year: f64,
    pub mttr_hours: f64,
}

/// One entry of `extreme_events.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtremeEvent {
    pub name: String,
    pub lines: Vec<String>,
    pub rate_per_year: f64,
    pub duration_hours: f64,
    #[serde(default = "default_event_class")]
    pub class: ScenarioClass,
}

fn default_event_class() -> ScenarioClass {
    ScenarioClass::Resilience
}

pub fn load_outage_rates(path: &Path) -> Result<Vec<OutageRate>> {
    let mut rdr = csv::Reader::from_path(path)
        .map_err(|e| Error::schema(path.display().to_string(), e.to_string()))?;
    let mut out = Vec::new();
    for rec in rdr.deserialize() {
        out.push(rec.map_err(|e| Error::schema(path.display().to_string(), e.to_string()))?);
    }
    Ok(out)
}

pub fn load_extreme_events(path: &Path) -> Result<Vec<ExtremeEvent>> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::schema(path.display().to_string(), e.to_string()))
}
