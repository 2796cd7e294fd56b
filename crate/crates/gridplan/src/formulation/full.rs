//! Conventional scenario-based planning model.
//!
//! Every outage scenario carries its own copy of the network operation
//! variables (flows, voltages, injections, imbalances, storage dispatch),
//! with per-period line availability switching failed lines out. This is
//! the baseline the scalable reformulation exists to replace: variable
//! count grows with scenarios x periods x days, so a size guard refuses to
//! build beyond a configurable cap.

use crate::error::{Error, Result};
use crate::milp::{name, MilpModel, Sense, VarId};
use crate::model::{AssetStatus, NetworkTopology};
use crate::scenario::ScenarioSet;
use std::collections::BTreeMap;

/// One scenario of the conventional model: a failure state pinned to a
/// concrete day and start period.
#[derive(Debug, Clone)]
pub struct FullScenario {
    /// Index into the scenario set's state catalog.
    pub state: usize,
    /// Outage covers periods `start ..= min(start + duration, last)`.
    pub duration: usize,
    pub probability: f64,
    pub day: usize,
    pub start: usize,
}

#[derive(Debug, Clone)]
pub struct FullInstance<'a> {
    pub topology: &'a NetworkTopology,
    /// Index 0 is the no-failure base scenario.
    pub scenarios: Vec<FullScenario>,
    /// Failure states referenced by the scenarios (index 0 = no failure).
    pub states: Vec<crate::scenario::FailureState>,
    pub lambda: f64,
    pub voll_usd_per_kwh: f64,
    pub cvar_alpha: f64,
    /// Cap on scenarios x periods x days.
    pub size_guard: usize,
}

pub const DEFAULT_SIZE_GUARD: usize = 20_000;

impl<'a> FullInstance<'a> {
    /// Pin each non-base scenario of `set` to a (day, start) slot.
    pub fn from_scenario_set(
        topology: &'a NetworkTopology,
        set: &ScenarioSet,
        starts: &[(usize, usize)],
    ) -> Result<Self> {
        if starts.len() + 1 != set.scenarios.len() {
            return Err(Error::Model(format!(
                "expected {} (day, start) assignments, got {}",
                set.scenarios.len() - 1,
                starts.len()
            )));
        }
        let mut scenarios = vec![FullScenario {
            state: 0,
            duration: 0,
            probability: set.scenarios[0].probability,
            day: 0,
            start: 0,
        }];
        for (i, sc) in set.scenarios.iter().enumerate().skip(1) {
            let (day, start) = starts[i - 1];
            if day >= topology.typical_days.len() || start >= topology.periods() {
                return Err(Error::Model(format!(
                    "scenario {i} start slot ({day},{start}) out of range"
                )));
            }
            scenarios.push(FullScenario {
                state: sc.state,
                duration: sc.duration_periods,
                probability: sc.probability,
                day,
                start,
            });
        }
        Ok(FullInstance {
            topology,
            scenarios,
            states: set.states.clone(),
            lambda: topology.economic.lambda_risk,
            voll_usd_per_kwh: topology.economic.voll_usd_per_kwh,
            cvar_alpha: topology.economic.cvar_alpha,
            size_guard: DEFAULT_SIZE_GUARD,
        })
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_voll(mut self, voll: f64) -> Self {
        self.voll_usd_per_kwh = voll;
        self
    }

    /// Is line `li` in service in scenario `s` at period `t` of day `d`?
    pub fn available(&self, li: usize, t: usize, d: usize, s: usize) -> bool {
        let sc = &self.scenarios[s];
        if d != sc.day || !self.states[sc.state].failed_lines.contains(&li) {
            return true;
        }
        let end = (sc.start + sc.duration).min(self.topology.periods() - 1);
        !(t >= sc.start && t <= end)
    }
}

/// Build the conventional model. Families: investment (`xL`, `xSf`,
/// `xSv`), CVaR (`zeta`, `psi`), and per-scenario operation (`flow`,
/// `inj`, `volt`, `dneg`, `dpos`, `pin`, `pout`, `soc`, `soc0`).
pub fn build_full_model(inst: &FullInstance) -> Result<MilpModel> {
    let topo = inst.topology;
    let econ = &topo.economic;
    let periods = topo.periods();
    let n_days = topo.typical_days.len();
    let n_scen = inst.scenarios.len();
    let cells = n_scen * periods * n_days;
    if cells > inst.size_guard {
        return Err(Error::SizeGuard {
            what: "scenarios x periods x days of the conventional model".into(),
            size: cells,
            cap: inst.size_guard,
        });
    }
    let delta = topo.delta_hours();
    let pf_voll = econ.power_factor * inst.voll_usd_per_kwh;
    let lambda = inst.lambda;
    let alpha = inst.cvar_alpha;

    let mut m = MilpModel::new(format!("plan_full_{}", topo.nodes.len()), "full");
    let mut obj: Vec<(VarId, f64)> = Vec::new();

    let mut x_line: BTreeMap<usize, VarId> = BTreeMap::new();
    for li in topo.candidate_lines() {
        let l = &topo.lines[li];
        let v = m.add_bin(name("xL", &[&l.id]))?;
        obj.push((v, l.fixed_cost_usd.unwrap_or(0.0)));
        x_line.insert(li, v);
    }
    let mut x_var: BTreeMap<usize, VarId> = BTreeMap::new();
    for hi in topo.candidate_storage() {
        let h = &topo.storage[hi];
        let f = m.add_bin(name("xSf", &[&h.id]))?;
        let cap = h.size_cap.unwrap_or(1.0);
        let v = m.add_cont(name("xSv", &[&h.id]), 0.0, cap)?;
        obj.push((f, h.fixed_cost_usd.unwrap_or(0.0)));
        obj.push((v, h.var_cost_usd_per_kwh.unwrap_or(0.0) * h.unit_energy_kwh()));
        m.add_constraint(
            name("sizing", &[&h.id]),
            &[(v, 1.0), (f, -cap)],
            Sense::Le,
            0.0,
        )?;
        x_var.insert(hi, v);
    }

    let mut zeta = vec![vec![VarId(0); n_days]; periods];
    let mut psi = vec![vec![vec![VarId(0); n_scen]; n_days]; periods];
    for t in 0..periods {
        let ts = t.to_string();
        for d in 0..n_days {
            let ds = d.to_string();
            zeta[t][d] = m.add_cont(name("zeta", &[&ts, &ds]), 0.0, f64::INFINITY)?;
            for s in 0..n_scen {
                psi[t][d][s] =
                    m.add_cont(name("psi", &[&ts, &ds, &s.to_string()]), 0.0, f64::INFINITY)?;
            }
        }
    }

    // Per-scenario operation variables.
    let mut flow: BTreeMap<(usize, usize, usize, usize), VarId> = BTreeMap::new();
    let mut inj: BTreeMap<(usize, usize, usize, usize), VarId> = BTreeMap::new();
    let mut volt: BTreeMap<(usize, usize, usize, usize), VarId> = BTreeMap::new();
    let mut d_neg: BTreeMap<(usize, usize, usize, usize), VarId> = BTreeMap::new();
    let mut d_pos: BTreeMap<(usize, usize, usize, usize), VarId> = BTreeMap::new();
    let mut p_in: BTreeMap<(usize, usize, usize, usize), VarId> = BTreeMap::new();
    let mut p_out: BTreeMap<(usize, usize, usize, usize), VarId> = BTreeMap::new();
    let mut soc: BTreeMap<(usize, usize, usize, usize), VarId> = BTreeMap::new();
    let mut soc0: BTreeMap<(usize, usize, usize), VarId> = BTreeMap::new();
    for s in 0..n_scen {
        let ss = s.to_string();
        for t in 0..periods {
            let ts = t.to_string();
            for d in 0..n_days {
                let ds = d.to_string();
                for (li, l) in topo.lines.iter().enumerate() {
                    let bound = match l.status {
                        AssetStatus::Existing => {
                            if inst.available(li, t, d, s) {
                                l.capacity_kw
                            } else {
                                0.0
                            }
                        }
                        // Candidate lines never fail (failure states only
                        // reference existing lines); their flow is gated by
                        // the investment binary through rows below.
                        AssetStatus::Candidate => l.capacity_kw,
                    };
                    let v = m.add_cont(name("flow", &[&l.id, &ts, &ds, &ss]), -bound, bound)?;
                    flow.insert((li, t, d, s), v);
                }
                for (ni, node) in topo.nodes.iter().enumerate() {
                    let vv = m.add_cont(
                        name("volt", &[&node.id, &ts, &ds, &ss]),
                        econ.v_min,
                        econ.v_max,
                    )?;
                    volt.insert((ni, t, d, s), vv);
                    if node.is_substation {
                        let g = m.add_cont(
                            name("inj", &[&node.id, &ts, &ds, &ss]),
                            0.0,
                            node.injection_limit_kw.unwrap_or(f64::INFINITY),
                        )?;
                        inj.insert((ni, t, d, s), g);
                    } else {
                        d_neg.insert(
                            (ni, t, d, s),
                            m.add_cont(name("dneg", &[&node.id, &ts, &ds, &ss]), 0.0, f64::INFINITY)?,
                        );
                        d_pos.insert(
                            (ni, t, d, s),
                            m.add_cont(name("dpos", &[&node.id, &ts, &ds, &ss]), 0.0, f64::INFINITY)?,
                        );
                    }
                }
                for (hi, h) in topo.storage.iter().enumerate() {
                    let (pin_up, pout_up, soc_up) = match h.status {
                        AssetStatus::Existing => {
                            (h.p_in_max_kw, h.p_out_max_kw, h.unit_energy_kwh())
                        }
                        AssetStatus::Candidate => (f64::INFINITY, f64::INFINITY, f64::INFINITY),
                    };
                    p_in.insert(
                        (hi, t, d, s),
                        m.add_cont(name("pin", &[&h.id, &ts, &ds, &ss]), 0.0, pin_up)?,
                    );
                    p_out.insert(
                        (hi, t, d, s),
                        m.add_cont(name("pout", &[&h.id, &ts, &ds, &ss]), 0.0, pout_up)?,
                    );
                    soc.insert(
                        (hi, t, d, s),
                        m.add_cont(name("soc", &[&h.id, &ts, &ds, &ss]), 0.0, soc_up)?,
                    );
                }
            }
        }
        for d in 0..n_days {
            let ds = d.to_string();
            for (hi, h) in topo.storage.iter().enumerate() {
                let soc_up = match h.status {
                    AssetStatus::Existing => h.unit_energy_kwh(),
                    AssetStatus::Candidate => f64::INFINITY,
                };
                soc0.insert(
                    (hi, d, s),
                    m.add_cont(name("soc0", &[&h.id, &ds, &ss]), 0.0, soc_up)?,
                );
            }
        }
    }

    // Objective: investment, base-case imbalance at full weight, expected
    // failure-scenario imbalance, CVaR tail.
    for t in 0..periods {
        for (d, day) in topo.typical_days.iter().enumerate() {
            let w = day.weight_days_per_year;
            for (ni, node) in topo.nodes.iter().enumerate() {
                if node.is_substation {
                    continue;
                }
                obj.push((d_neg[&(ni, t, d, 0)], w * pf_voll * delta));
                obj.push((d_pos[&(ni, t, d, 0)], w * pf_voll * delta));
                for (s, sc) in inst.scenarios.iter().enumerate().skip(1) {
                    let coeff = (1.0 - lambda) * pf_voll * w * sc.probability * delta;
                    obj.push((d_neg[&(ni, t, d, s)], coeff));
                    obj.push((d_pos[&(ni, t, d, s)], coeff));
                }
            }
            obj.push((zeta[t][d], lambda * pf_voll * w));
            for (s, sc) in inst.scenarios.iter().enumerate().skip(1) {
                obj.push((
                    psi[t][d][s],
                    lambda * pf_voll * w * sc.probability / (1.0 - alpha),
                ));
            }
        }
    }
    m.set_objective(&obj);

    // CVaR tail excess over the per-slot imbalance energy of each failure
    // scenario.
    for t in 0..periods {
        let ts = t.to_string();
        for d in 0..n_days {
            let ds = d.to_string();
            for s in 1..n_scen {
                let mut terms = vec![(psi[t][d][s], 1.0), (zeta[t][d], 1.0)];
                for (ni, node) in topo.nodes.iter().enumerate() {
                    if !node.is_substation {
                        terms.push((d_neg[&(ni, t, d, s)], -delta));
                        terms.push((d_pos[&(ni, t, d, s)], -delta));
                    }
                }
                m.add_constraint(
                    name("cvar_tail", &[&ts, &ds, &s.to_string()]),
                    &terms,
                    Sense::Ge,
                    0.0,
                )?;
            }
        }
    }

    // Per-scenario network operation.
    for s in 0..n_scen {
        let ss = s.to_string();
        for t in 0..periods {
            let ts = t.to_string();
            for d in 0..n_days {
                let ds = d.to_string();
                for (ni, node) in topo.nodes.iter().enumerate() {
                    let mut terms: Vec<(VarId, f64)> = Vec::new();
                    for (li, l) in topo.lines.iter().enumerate() {
                        if topo.node_index(&l.to_node).unwrap() == ni {
                            terms.push((flow[&(li, t, d, s)], 1.0));
                        }
                        if topo.node_index(&l.from_node).unwrap() == ni {
                            terms.push((flow[&(li, t, d, s)], -1.0));
                        }
                    }
                    if node.is_substation {
                        terms.push((inj[&(ni, t, d, s)], 1.0));
                        m.add_constraint(
                            name("balance_ss", &[&node.id, &ts, &ds, &ss]),
                            &terms,
                            Sense::Eq,
                            0.0,
                        )?;
                    } else {
                        for (hi, h) in topo.storage.iter().enumerate() {
                            if topo.node_index(&h.node).unwrap() == ni {
                                terms.push((p_in[&(hi, t, d, s)], -1.0));
                                terms.push((p_out[&(hi, t, d, s)], 1.0));
                            }
                        }
                        terms.push((d_neg[&(ni, t, d, s)], 1.0));
                        terms.push((d_pos[&(ni, t, d, s)], -1.0));
                        m.add_constraint(
                            name("balance", &[&node.id, &ts, &ds, &ss]),
                            &terms,
                            Sense::Eq,
                            topo.demand_by_index(ni, t, d),
                        )?;
                    }
                }
                for (li, l) in topo.lines.iter().enumerate() {
                    let nf = topo.node_index(&l.from_node).unwrap();
                    let nt = topo.node_index(&l.to_node).unwrap();
                    let z = l.impedance_per_len * l.length_mi;
                    match l.status {
                        AssetStatus::Existing => {
                            // In service: flow-voltage coupling holds as an
                            // equality. Out of service: the coupling is
                            // released entirely (flow is already fixed to 0
                            // by its bounds).
                            if inst.available(li, t, d, s) {
                                m.add_constraint(
                                    name("ohm", &[&l.id, &ts, &ds, &ss]),
                                    &[
                                        (flow[&(li, t, d, s)], z),
                                        (volt[&(nf, t, d, s)], -1.0),
                                        (volt[&(nt, t, d, s)], 1.0),
                                    ],
                                    Sense::Eq,
                                    0.0,
                                )?;
                            }
                        }
                        AssetStatus::Candidate => {
                            let big_m = (econ.v_max - econ.v_min) + z * l.capacity_kw;
                            let xl = x_line[&li];
                            m.add_constraint(
                                name("fcap_hi", &[&l.id, &ts, &ds, &ss]),
                                &[(flow[&(li, t, d, s)], 1.0), (xl, -l.capacity_kw)],
                                Sense::Le,
                                0.0,
                            )?;
                            m.add_constraint(
                                name("fcap_lo", &[&l.id, &ts, &ds, &ss]),
                                &[(flow[&(li, t, d, s)], 1.0), (xl, l.capacity_kw)],
                                Sense::Ge,
                                0.0,
                            )?;
                            m.add_constraint(
                                name("ohm_lo", &[&l.id, &ts, &ds, &ss]),
                                &[
                                    (flow[&(li, t, d, s)], z),
                                    (volt[&(nf, t, d, s)], -1.0),
                                    (volt[&(nt, t, d, s)], 1.0),
                                    (xl, -big_m),
                                ],
                                Sense::Ge,
                                -big_m,
                            )?;
                            m.add_constraint(
                                name("ohm_hi", &[&l.id, &ts, &ds, &ss]),
                                &[
                                    (flow[&(li, t, d, s)], z),
                                    (volt[&(nf, t, d, s)], -1.0),
                                    (volt[&(nt, t, d, s)], 1.0),
                                    (xl, big_m),
                                ],
                                Sense::Le,
                                big_m,
                            )?;
                        }
                    }
                }
                for (hi, h) in topo.storage.iter().enumerate() {
                    let prev = if t == 0 {
                        soc0[&(hi, d, s)]
                    } else {
                        soc[&(hi, t - 1, d, s)]
                    };
                    m.add_constraint(
                        name("soc_dyn", &[&h.id, &ts, &ds, &ss]),
                        &[
                            (soc[&(hi, t, d, s)], 1.0),
                            (prev, -1.0),
                            (p_in[&(hi, t, d, s)], -h.round_trip_eff * delta),
                            (p_out[&(hi, t, d, s)], delta),
                        ],
                        Sense::Eq,
                        0.0,
                    )?;
                    if h.status == AssetStatus::Candidate {
                        let energy = h.unit_energy_kwh();
                        let xv = x_var[&hi];
                        m.add_constraint(
                            name("soc_cap", &[&h.id, &ts, &ds, &ss]),
                            &[(soc[&(hi, t, d, s)], 1.0), (xv, -energy)],
                            Sense::Le,
                            0.0,
                        )?;
                        m.add_constraint(
                            name("pin_cap", &[&h.id, &ts, &ds, &ss]),
                            &[(p_in[&(hi, t, d, s)], 1.0), (xv, -h.p_in_max_kw)],
                            Sense::Le,
                            0.0,
                        )?;
                        m.add_constraint(
                            name("pout_cap", &[&h.id, &ts, &ds, &ss]),
                            &[(p_out[&(hi, t, d, s)], 1.0), (xv, -h.p_out_max_kw)],
                            Sense::Le,
                            0.0,
                        )?;
                    }
                }
            }
        }
        for d in 0..n_days {
            let ds = d.to_string();
            for (hi, h) in topo.storage.iter().enumerate() {
                m.add_constraint(
                    name("soc_cycle", &[&h.id, &ds, &ss]),
                    &[
                        (soc[&(hi, periods - 1, d, s)], 1.0),
                        (soc0[&(hi, d, s)], -1.0),
                    ],
                    Sense::Eq,
                    0.0,
                )?;
                if h.status == AssetStatus::Candidate {
                    m.add_constraint(
                        name("soc0_cap", &[&h.id, &ds, &ss]),
                        &[(soc0[&(hi, d, s)], 1.0), (x_var[&hi], -h.unit_energy_kwh())],
                        Sense::Le,
                        0.0,
                    )?;
                }
            }
        }
    }

    Ok(m)
}
