//! Domain model of the feeder: nodes, lines, storage, typical days, and
//! economic parameters, with validation.
//!
//! Canonical units throughout the crate: kW, kWh, hours, miles, US$.
//! Per-period demand is always derived, never stored:
//! `demand(n,t,d) = peak_demand_kw(n) * load_factor(t,d)`.

mod io;

pub use io::{load_network, save_network, NetworkFormat};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AssetStatus {
    Existing,
    Candidate,
}

/// A bus of the feeder. Substations carry an injection limit and no load.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub is_substation: bool,
    pub peak_demand_kw: f64,
    pub customers: u64,
    /// Injection limit from the transmission grid; substations only.
    pub injection_limit_kw: Option<f64>,
}

/// A line segment, existing or candidate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Line {
    pub id: String,
    pub from_node: String,
    pub to_node: String,
    /// Voltage drop per mile and per kW of flow (linearized network model).
    pub impedance_per_len: f64,
    pub length_mi: f64,
    pub capacity_kw: f64,
    pub status: AssetStatus,
    /// Investment cost; candidates only.
    pub fixed_cost_usd: Option<f64>,
}

/// A storage device, existing or candidate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StorageDevice {
    pub id: String,
    pub node: String,
    pub status: AssetStatus,
    pub p_in_max_kw: f64,
    pub p_out_max_kw: f64,
    /// Round-trip efficiency, applied on the charging side.
    pub round_trip_eff: f64,
    /// Hours to fully charge at maximum input; energy capacity of a fully
    /// built unit is `hours_to_full * p_in_max_kw` kWh.
    pub hours_to_full: f64,
    pub fixed_cost_usd: Option<f64>,
    pub var_cost_usd_per_kwh: Option<f64>,
    /// Upper bound on the continuous sizing variable; candidates only.
    pub size_cap: Option<f64>,
}

impl StorageDevice {
    /// Energy capacity of one fully built unit, in kWh.
    pub fn unit_energy_kwh(&self) -> f64 {
        self.hours_to_full * self.p_in_max_kw
    }

    /// Maximum installable energy in kWh (sizing cap for candidates,
    /// nameplate for existing devices).
    pub fn max_energy_kwh(&self) -> f64 {
        match self.status {
            AssetStatus::Existing => self.unit_energy_kwh(),
            AssetStatus::Candidate => self.unit_energy_kwh() * self.size_cap.unwrap_or(1.0),
        }
    }
}

/// A representative day: an ordered load/price profile weighted by how many
/// days per year it stands for.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TypicalDay {
    pub id: String,
    pub weight_days_per_year: f64,
    pub hours_per_period: f64,
    /// Fraction of peak load per period, in [0,1].
    pub load_factor: Vec<f64>,
    /// Energy price per period, input to storage profile optimization.
    pub price_usd_per_kwh: Vec<f64>,
}

impl TypicalDay {
    pub fn periods(&self) -> usize {
        self.load_factor.len()
    }
}

/// Economic and bound parameters shared by both formulations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EconomicParams {
    /// Value of lost load, $ per kWh.
    pub voll_usd_per_kwh: f64,
    pub power_factor: f64,
    /// Risk-aversion weight on the CVaR term, in [0,1].
    pub lambda_risk: f64,
    /// CVaR level in [0,1): the tail holds probability 1 - alpha.
    pub cvar_alpha: f64,
    /// Bus voltage bounds for the linearized network model (required
    /// inputs; there is no sensible default).
    pub v_min: f64,
    pub v_max: f64,
}

/// Validated feeder model. Immutable after load; safe to share across
/// threads read-only.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkTopology {
    pub nodes: Vec<Node>,
    pub lines: Vec<Line>,
    pub storage: Vec<StorageDevice>,
    pub typical_days: Vec<TypicalDay>,
    pub economic: EconomicParams,
    #[serde(skip)]
    node_idx: HashMap<String, usize>,
    #[serde(skip)]
    line_idx: HashMap<String, usize>,
    #[serde(skip)]
    storage_idx: HashMap<String, usize>,
}

impl NetworkTopology {
    /// Build and validate a topology. Every violation found is reported,
    /// not only the first.
    pub fn new(
        nodes: Vec<Node>,
        lines: Vec<Line>,
        storage: Vec<StorageDevice>,
        typical_days: Vec<TypicalDay>,
        economic: EconomicParams,
    ) -> Result<Self> {
        let mut t = NetworkTopology {
            nodes,
            lines,
            storage,
            typical_days,
            economic,
            node_idx: HashMap::new(),
            line_idx: HashMap::new(),
            storage_idx: HashMap::new(),
        };
        t.validate()?;
        Ok(t)
    }

    /// Re-run validation and rebuild the id indexes. Needed after
    /// deserializing or mutating the public fields directly.
    pub fn validate(&mut self) -> Result<()> {
        let mut bad = Vec::new();

        self.node_idx.clear();
        for (i, n) in self.nodes.iter().enumerate() {
            if self.node_idx.insert(n.id.clone(), i).is_some() {
                bad.push(format!("duplicate node id {}", n.id));
            }
            if n.is_substation {
                if n.peak_demand_kw != 0.0 {
                    bad.push(format!("substation {} has nonzero peak demand", n.id));
                }
                if n.injection_limit_kw.is_none() {
                    bad.push(format!("substation {} missing injection_limit_kw", n.id));
                }
            } else {
                if n.injection_limit_kw.is_some() {
                    bad.push(format!("non-substation {} has injection_limit_kw", n.id));
                }
                if n.peak_demand_kw < 0.0 {
                    bad.push(format!("node {} has negative peak demand", n.id));
                }
            }
        }
        if !self.nodes.iter().any(|n| n.is_substation) {
            bad.push("network has no substation".to_string());
        }

        self.line_idx.clear();
        for (i, l) in self.lines.iter().enumerate() {
            if self.line_idx.insert(l.id.clone(), i).is_some() {
                bad.push(format!("duplicate line id {}", l.id));
            }
            if l.from_node == l.to_node {
                bad.push(format!("line {} connects a node to itself", l.id));
            }
            for end in [&l.from_node, &l.to_node] {
                if !self.node_idx.contains_key(end) {
                    bad.push(format!("line {} references unknown node {end}", l.id));
                }
            }
            if l.capacity_kw <= 0.0 {
                bad.push(format!("line {} has non-positive capacity", l.id));
            }
            if l.impedance_per_len < 0.0 || l.length_mi < 0.0 {
                bad.push(format!("line {} has negative impedance or length", l.id));
            }
            match (l.status, l.fixed_cost_usd) {
                (AssetStatus::Candidate, None) => {
                    bad.push(format!("candidate line {} missing fixed_cost_usd", l.id))
                }
                (AssetStatus::Candidate, Some(c)) if c < 0.0 => {
                    bad.push(format!("candidate line {} has negative cost", l.id))
                }
                (AssetStatus::Existing, Some(_)) => {
                    bad.push(format!("existing line {} carries a fixed cost", l.id))
                }
                _ => {}
            }
        }

        self.storage_idx.clear();
        for (i, h) in self.storage.iter().enumerate() {
            if self.storage_idx.insert(h.id.clone(), i).is_some() {
                bad.push(format!("duplicate storage id {}", h.id));
            }
            match self.node_idx.get(&h.node) {
                None => bad.push(format!("storage {} references unknown node {}", h.id, h.node)),
                Some(&ni) if self.nodes[ni].is_substation => bad.push(format!(
                    "storage {} sits at substation {}; substation buses carry no dispatch",
                    h.id, h.node
                )),
                _ => {}
            }
            if h.p_in_max_kw <= 0.0 || h.p_out_max_kw <= 0.0 {
                bad.push(format!("storage {} has non-positive power rating", h.id));
            }
            if !(h.round_trip_eff > 0.0 && h.round_trip_eff <= 1.0) {
                bad.push(format!("storage {} efficiency outside (0,1]", h.id));
            }
            if h.hours_to_full <= 0.0 {
                bad.push(format!("storage {} has non-positive hours_to_full", h.id));
            }
            let is_cand = h.status == AssetStatus::Candidate;
            for (field, present) in [
                ("fixed_cost_usd", h.fixed_cost_usd.is_some()),
                ("var_cost_usd_per_kwh", h.var_cost_usd_per_kwh.is_some()),
                ("size_cap", h.size_cap.is_some()),
            ] {
                if is_cand && !present {
                    bad.push(format!("candidate storage {} missing {field}", h.id));
                }
                if !is_cand && present {
                    bad.push(format!("existing storage {} carries {field}", h.id));
                }
            }
            if let Some(cap) = h.size_cap {
                if cap <= 0.0 {
                    bad.push(format!("storage {} has non-positive size_cap", h.id));
                }
            }
        }

        let mut day_ids = HashMap::new();
        let periods = self.typical_days.first().map_or(0, |d| d.periods());
        let mut weight_sum = 0.0;
        for (i, d) in self.typical_days.iter().enumerate() {
            if day_ids.insert(d.id.clone(), i).is_some() {
                bad.push(format!("duplicate typical day id {}", d.id));
            }
            if d.periods() == 0 {
                bad.push(format!("typical day {} has no periods", d.id));
            }
            if d.periods() != periods {
                bad.push(format!(
                    "typical day {} has {} periods, expected {} (all days must share the grid)",
                    d.id,
                    d.periods(),
                    periods
                ));
            }
            if d.price_usd_per_kwh.len() != d.periods() {
                bad.push(format!("typical day {} price/load length mismatch", d.id));
            }
            if (d.hours_per_period * d.periods() as f64 - 24.0).abs() > 1e-9 {
                bad.push(format!("typical day {} does not span 24 h", d.id));
            }
            if d.weight_days_per_year <= 0.0 {
                bad.push(format!("typical day {} has non-positive weight", d.id));
            }
            for (t, &f) in d.load_factor.iter().enumerate() {
                if !(0.0..=1.0).contains(&f) {
                    bad.push(format!(
                        "typical day {} load factor out of [0,1] at period {}",
                        d.id,
                        t + 1
                    ));
                }
            }
            weight_sum += d.weight_days_per_year;
        }
        if !self.typical_days.is_empty() && (weight_sum - 365.0).abs() > 1.0 + 1e-9 {
            bad.push(format!(
                "typical day weights sum to {weight_sum}, expected 365 (+/- 1 for leap years)"
            ));
        }
        if let Some(d0) = self.typical_days.first() {
            let delta = d0.hours_per_period;
            if self
                .typical_days
                .iter()
                .any(|d| (d.hours_per_period - delta).abs() > 1e-12)
            {
                bad.push("typical days disagree on hours_per_period".to_string());
            }
        }

        let e = &self.economic;
        if e.voll_usd_per_kwh <= 0.0 {
            bad.push("voll_usd_per_kwh must be positive".to_string());
        }
        if !(e.power_factor > 0.0 && e.power_factor <= 1.0) {
            bad.push("power_factor outside (0,1]".to_string());
        }
        if !(0.0..=1.0).contains(&e.lambda_risk) {
            bad.push("lambda_risk outside [0,1]".to_string());
        }
        if !(0.0..1.0).contains(&e.cvar_alpha) {
            bad.push("cvar_alpha outside [0,1)".to_string());
        }
        if !(e.v_min.is_finite() && e.v_max.is_finite() && e.v_min < e.v_max) {
            bad.push("voltage bounds must be finite with v_min < v_max".to_string());
        }

        // Pre-failure energization: every non-substation node must reach a
        // substation over existing lines.
        if bad.is_empty() {
            let reached = self.reachable_over_existing();
            for (i, n) in self.nodes.iter().enumerate() {
                if !n.is_substation && !reached[i] {
                    bad.push(format!(
                        "node {} is not connected to any substation over existing lines",
                        n.id
                    ));
                }
            }
        }

        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(bad))
        }
    }

    fn reachable_over_existing(&self) -> Vec<bool> {
        let n = self.nodes.len();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for l in &self.lines {
            if l.status == AssetStatus::Existing {
                let (a, b) = (self.node_idx[&l.from_node], self.node_idx[&l.to_node]);
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        let mut seen = vec![false; n];
        let mut queue: Vec<usize> = (0..n).filter(|&i| self.nodes[i].is_substation).collect();
        for &s in &queue {
            seen[s] = true;
        }
        while let Some(u) = queue.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push(v);
                }
            }
        }
        seen
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.node_idx.get(id).copied()
    }

    pub fn line_index(&self, id: &str) -> Option<usize> {
        self.line_idx.get(id).copied()
    }

    pub fn storage_index(&self, id: &str) -> Option<usize> {
        self.storage_idx.get(id).copied()
    }

    /// Indices of existing lines.
    pub fn existing_lines(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.lines.len()).filter(|&i| self.lines[i].status == AssetStatus::Existing)
    }

    /// Indices of candidate lines.
    pub fn candidate_lines(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.lines.len()).filter(|&i| self.lines[i].status == AssetStatus::Candidate)
    }

    pub fn candidate_storage(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.storage.len()).filter(|&i| self.storage[i].status == AssetStatus::Candidate)
    }

    /// Periods per day (identical across typical days).
    pub fn periods(&self) -> usize {
        self.typical_days.first().map_or(0, |d| d.periods())
    }

    /// Hours per period.
    pub fn delta_hours(&self) -> f64 {
        self.typical_days.first().map_or(1.0, |d| d.hours_per_period)
    }

    /// Demand of a bus at period `t` (0-based) of typical day `d`, in kW.
    pub fn demand(&self, node_id: &str, t: usize, d: usize) -> Result<f64> {
        let ni = self
            .node_index(node_id)
            .ok_or_else(|| Error::Validation(vec![format!("unknown node {node_id}")]))?;
        if self.nodes[ni].is_substation {
            return Err(Error::Validation(vec![format!(
                "demand requested for substation {node_id}"
            )]));
        }
        let day = self
            .typical_days
            .get(d)
            .ok_or_else(|| Error::Validation(vec![format!("unknown typical day index {d}")]))?;
        if t >= day.periods() {
            return Err(Error::Validation(vec![format!(
                "period {t} out of range for typical day {}",
                day.id
            )]));
        }
        Ok(self.nodes[ni].peak_demand_kw * day.load_factor[t])
    }

    /// Unchecked fast path used by model builders and the simulator.
    pub(crate) fn demand_by_index(&self, ni: usize, t: usize, d: usize) -> f64 {
        self.nodes[ni].peak_demand_kw * self.typical_days[d].load_factor[t]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_fixtures::toy_topology;

    #[test]
    fn demand_is_peak_times_load_factor() {
        let topo = toy_topology();
        // n2 has peak 100 kW; day 0 period 1 has factor 0.5.
        assert_eq!(topo.demand("n2", 1, 0).unwrap(), 50.0);
        // zero factor -> zero demand
        assert_eq!(topo.demand("n2", 0, 0).unwrap(), 0.0);
    }

    #[test]
    fn demand_rejects_unknown_ids_and_substations() {
        let topo = toy_topology();
        assert!(topo.demand("nope", 0, 0).is_err());
        assert!(topo.demand("sub", 0, 0).is_err());
        assert!(topo.demand("n2", 99, 0).is_err());
    }

    #[test]
    fn derived_demand_never_exceeds_peak() {
        let topo = toy_topology();
        for n in topo.nodes.iter().filter(|n| !n.is_substation) {
            for (d, day) in topo.typical_days.iter().enumerate() {
                for t in 0..day.periods() {
                    assert!(topo.demand(&n.id, t, d).unwrap() <= n.peak_demand_kw);
                }
            }
        }
    }

    #[test]
    fn validation_lists_all_violations() {
        let mut topo = toy_topology();
        topo.nodes[0].peak_demand_kw = 5.0; // substation with demand
        topo.lines[0].capacity_kw = -1.0;
        topo.storage[0].round_trip_eff = 1.5;
        let err = topo.validate().unwrap_err();
        match err {
            Error::Validation(v) => {
                assert!(v.len() >= 3, "expected all violations, got {v:?}")
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn disconnected_node_named_in_error() {
        let mut topo = toy_topology();
        topo.nodes.push(Node {
            id: "n7".into(),
            is_substation: false,
            peak_demand_kw: 10.0,
            customers: 3,
            injection_limit_kw: None,
        });
        let err = topo.validate().unwrap_err();
        assert!(err.to_string().contains("n7"), "{err}");
    }
}
