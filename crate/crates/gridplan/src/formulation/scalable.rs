//! Scalability-oriented planning model.
//!
//! Outage scenarios are mapped to grid failure states; per state, one
//! indicator binary per relevant-candidate build combination selects the
//! matching island decomposition, and per-slot loss of load is bounded
//! below by island peak demand scaled to the outage window minus the state
//! of charge of islanded storage (profile-scaled for routine outages, full
//! capacity for predicted extreme events). Network operation appears only
//! in the no-failure base case, with storage pinned to its daily profile
//! through a reference-capacity variable.

use super::window_load_factor;
use crate::error::{Error, Result};
use crate::islanding::IslandCatalog;
use crate::milp::{name, MilpModel, Sense, VarId};
use crate::model::{AssetStatus, NetworkTopology};
use crate::scenario::{ScenarioClass, ScenarioSet};
use crate::sim::{evaluate_plan, InvestmentPlan};
use crate::soc::SocProfile;
use crate::solver::{SolveResult, SolveStatus};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Everything the scalable builder consumes. Risk weight, value of lost
/// load, and CVaR level default to the topology's economic parameters and
/// can be overridden per sweep cell.
#[derive(Debug, Clone)]
pub struct ScalableInstance<'a> {
    pub topology: &'a NetworkTopology,
    pub scenarios: &'a ScenarioSet,
    pub catalog: &'a IslandCatalog,
    pub profiles: &'a SocProfile,
    pub lambda: f64,
    pub voll_usd_per_kwh: f64,
    pub cvar_alpha: f64,
}

impl<'a> ScalableInstance<'a> {
    pub fn new(
        topology: &'a NetworkTopology,
        scenarios: &'a ScenarioSet,
        catalog: &'a IslandCatalog,
        profiles: &'a SocProfile,
    ) -> Result<Self> {
        if catalog.per_state.len() != scenarios.states.len() {
            return Err(Error::Model(format!(
                "island catalog covers {} states but the scenario set has {}",
                catalog.per_state.len(),
                scenarios.states.len()
            )));
        }
        if topology.periods() == 0 {
            return Err(Error::Validation(vec![
                "topology has no typical days".into()
            ]));
        }
        Ok(ScalableInstance {
            topology,
            scenarios,
            catalog,
            profiles,
            lambda: topology.economic.lambda_risk,
            voll_usd_per_kwh: topology.economic.voll_usd_per_kwh,
            cvar_alpha: topology.economic.cvar_alpha,
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

    pub fn with_cvar_alpha(mut self, alpha: f64) -> Self {
        self.cvar_alpha = alpha;
        self
    }
}

/// Build the model. Variable families (by structured name):
/// `xL(l)`, `xSf(h)`, `xSv(h)` investments; `xind(c,j)` combination
/// indicators; `Lisl(c,j,e)` island peak loads; `socaux(c,j,e,h)` and
/// `socref(h)` storage charge; `Ldag(t,d,s)` per-slot loss; `zeta(t,d)` /
/// `psi(t,d,s)` CVaR; plus base-case operation (`flow`, `inj`, `volt`,
/// `dneg`, `dpos`, `pin`, `pout`, `soc`, `soc0`).
pub fn build_scalable_model(inst: &ScalableInstance) -> Result<MilpModel> {
    let topo = inst.topology;
    let econ = &topo.economic;
    let periods = topo.periods();
    let n_days = topo.typical_days.len();
    let delta = topo.delta_hours();
    let pf_voll = econ.power_factor * inst.voll_usd_per_kwh;
    let lambda = inst.lambda;
    let alpha = inst.cvar_alpha;
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Validation(vec!["lambda outside [0,1]".into()]));
    }
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::Validation(vec!["cvar alpha outside [0,1)".into()]));
    }

    let mut m = MilpModel::new(format!("plan_{}", topo.nodes.len()), "scalable");
    let mut obj: Vec<(VarId, f64)> = Vec::new();

    // Investment variables and their costs.
    let mut x_line: BTreeMap<usize, VarId> = BTreeMap::new();
    for li in topo.candidate_lines() {
        let l = &topo.lines[li];
        let v = m.add_bin(name("xL", &[&l.id]))?;
        obj.push((v, l.fixed_cost_usd.unwrap_or(0.0)));
        x_line.insert(li, v);
    }
    let mut x_fix: BTreeMap<usize, VarId> = BTreeMap::new();
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
        x_fix.insert(hi, f);
        x_var.insert(hi, v);
    }

    // Reference state of charge per device; candidates are capped by the
    // sizing variable via a row, existing devices by their nameplate bound.
    let mut soc_ref: Vec<VarId> = Vec::with_capacity(topo.storage.len());
    for (hi, h) in topo.storage.iter().enumerate() {
        let upper = match h.status {
            AssetStatus::Existing => h.unit_energy_kwh(),
            AssetStatus::Candidate => f64::INFINITY,
        };
        let r = m.add_cont(name("socref", &[&h.id]), 0.0, upper)?;
        if h.status == AssetStatus::Candidate {
            m.add_constraint(
                name("refcap", &[&h.id]),
                &[(r, 1.0), (x_var[&hi], -h.unit_energy_kwh())],
                Sense::Le,
                0.0,
            )?;
        }
        soc_ref.push(r);
    }

    // Combination indicators, island loads, and islanded state of charge.
    let n_states = inst.scenarios.states.len();
    let mut x_ind: Vec<Vec<VarId>> = Vec::with_capacity(n_states);
    let mut l_isl: Vec<Vec<Vec<VarId>>> = Vec::with_capacity(n_states);
    let mut aux: Vec<Vec<Vec<Vec<VarId>>>> = Vec::with_capacity(n_states);
    for (c, entry) in inst.catalog.per_state.iter().enumerate() {
        let cs = c.to_string();
        let mut inds = Vec::with_capacity(entry.combos.len());
        let mut loads = Vec::with_capacity(entry.combos.len());
        let mut auxes = Vec::with_capacity(entry.combos.len());
        for (j, combo) in entry.combos.iter().enumerate() {
            let js = j.to_string();
            let ind = m.add_bin(name("xind", &[&cs, &js]))?;
            let mut combo_loads = Vec::with_capacity(combo.islands.len());
            let mut combo_aux = Vec::with_capacity(combo.islands.len());
            for (e, island) in combo.islands.iter().enumerate() {
                let es = e.to_string();
                let load = m.add_cont(name("Lisl", &[&cs, &js, &es]), 0.0, f64::INFINITY)?;
                let mut island_aux = Vec::with_capacity(island.storage.len());
                for &hi in &island.storage {
                    let h = &topo.storage[hi];
                    let big_m = h.unit_energy_kwh() * h.size_cap.unwrap_or(1.0).max(1.0);
                    let a =
                        m.add_cont(name("socaux", &[&cs, &js, &es, &h.id]), 0.0, big_m)?;
                    island_aux.push(a);
                }
                combo_loads.push(load);
                combo_aux.push(island_aux);
            }
            inds.push(ind);
            loads.push(combo_loads);
            auxes.push(combo_aux);
        }
        x_ind.push(inds);
        l_isl.push(loads);
        aux.push(auxes);
    }

    // Loss, value-at-risk, and tail-excess variables per slot.
    let n_scen = inst.scenarios.num_scenarios();
    let mut loss = vec![vec![vec![VarId(0); n_scen]; n_days]; periods];
    let mut psi = vec![vec![vec![VarId(0); n_scen]; n_days]; periods];
    let mut zeta = vec![vec![VarId(0); n_days]; periods];
    for t in 0..periods {
        let ts = t.to_string();
        for d in 0..n_days {
            let ds = d.to_string();
            zeta[t][d] = m.add_cont(name("zeta", &[&ts, &ds]), 0.0, f64::INFINITY)?;
            for s in 0..n_scen {
                let ss = s.to_string();
                // The base scenario sheds nothing by definition.
                let upper = if s == 0 { 0.0 } else { f64::INFINITY };
                loss[t][d][s] = m.add_cont(name("Ldag", &[&ts, &ds, &ss]), 0.0, upper)?;
                psi[t][d][s] = m.add_cont(name("psi", &[&ts, &ds, &ss]), 0.0, f64::INFINITY)?;
            }
        }
    }

    // Base-case operation variables (existing lines only; candidates only
    // matter after failures).
    let existing: Vec<usize> = topo.existing_lines().collect();
    let mut flow: BTreeMap<(usize, usize, usize), VarId> = BTreeMap::new();
    let mut inj: BTreeMap<(usize, usize, usize), VarId> = BTreeMap::new();
    let mut volt: BTreeMap<(usize, usize, usize), VarId> = BTreeMap::new();
    let mut d_neg: BTreeMap<(usize, usize, usize), VarId> = BTreeMap::new();
    let mut d_pos: BTreeMap<(usize, usize, usize), VarId> = BTreeMap::new();
    let mut p_in: BTreeMap<(usize, usize, usize), VarId> = BTreeMap::new();
    let mut p_out: BTreeMap<(usize, usize, usize), VarId> = BTreeMap::new();
    let mut soc: BTreeMap<(usize, usize, usize), VarId> = BTreeMap::new();
    let mut soc0: BTreeMap<(usize, usize), VarId> = BTreeMap::new();
    for t in 0..periods {
        let ts = t.to_string();
        for d in 0..n_days {
            let ds = d.to_string();
            for &li in &existing {
                let l = &topo.lines[li];
                let v = m.add_cont(
                    name("flow", &[&l.id, &ts, &ds]),
                    -l.capacity_kw,
                    l.capacity_kw,
                )?;
                flow.insert((li, t, d), v);
            }
            for (ni, node) in topo.nodes.iter().enumerate() {
                let vv = m.add_cont(
                    name("volt", &[&node.id, &ts, &ds]),
                    econ.v_min,
                    econ.v_max,
                )?;
                volt.insert((ni, t, d), vv);
                if node.is_substation {
                    let g = m.add_cont(
                        name("inj", &[&node.id, &ts, &ds]),
                        0.0,
                        node.injection_limit_kw.unwrap_or(f64::INFINITY),
                    )?;
                    inj.insert((ni, t, d), g);
                } else {
                    let dn =
                        m.add_cont(name("dneg", &[&node.id, &ts, &ds]), 0.0, f64::INFINITY)?;
                    let dp =
                        m.add_cont(name("dpos", &[&node.id, &ts, &ds]), 0.0, f64::INFINITY)?;
                    d_neg.insert((ni, t, d), dn);
                    d_pos.insert((ni, t, d), dp);
                }
            }
            for (hi, h) in topo.storage.iter().enumerate() {
                let (pin_up, pout_up) = match h.status {
                    AssetStatus::Existing => (h.p_in_max_kw, h.p_out_max_kw),
                    AssetStatus::Candidate => (f64::INFINITY, f64::INFINITY),
                };
                let pi = m.add_cont(name("pin", &[&h.id, &ts, &ds]), 0.0, pin_up)?;
                let po = m.add_cont(name("pout", &[&h.id, &ts, &ds]), 0.0, pout_up)?;
                let sc = m.add_cont(name("soc", &[&h.id, &ts, &ds]), 0.0, f64::INFINITY)?;
                p_in.insert((hi, t, d), pi);
                p_out.insert((hi, t, d), po);
                soc.insert((hi, t, d), sc);
            }
        }
    }
    for d in 0..n_days {
        for (hi, h) in topo.storage.iter().enumerate() {
            let v = m.add_cont(name("soc0", &[&h.id, &d.to_string()]), 0.0, f64::INFINITY)?;
            soc0.insert((hi, d), v);
        }
    }

    // Objective: investment, base-case imbalance, expected loss, CVaR.
    for t in 0..periods {
        for (d, day) in topo.typical_days.iter().enumerate() {
            let w = day.weight_days_per_year;
            for (ni, node) in topo.nodes.iter().enumerate() {
                if !node.is_substation {
                    obj.push((d_neg[&(ni, t, d)], w * pf_voll * delta));
                    obj.push((d_pos[&(ni, t, d)], w * pf_voll * delta));
                }
            }
            obj.push((zeta[t][d], lambda * pf_voll * w));
            for (s, scen) in inst.scenarios.scenarios.iter().enumerate() {
                obj.push((loss[t][d][s], (1.0 - lambda) * pf_voll * w * scen.probability));
                obj.push((
                    psi[t][d][s],
                    lambda * pf_voll * w * scen.probability / (1.0 - alpha),
                ));
            }
        }
    }
    m.set_objective(&obj);

    // CVaR tail excess: psi >= loss - zeta, every slot and scenario.
    for t in 0..periods {
        let ts = t.to_string();
        for d in 0..n_days {
            let ds = d.to_string();
            for s in 0..n_scen {
                m.add_constraint(
                    name("cvar_tail", &[&ts, &ds, &s.to_string()]),
                    &[
                        (psi[t][d][s], 1.0),
                        (zeta[t][d], 1.0),
                        (loss[t][d][s], -1.0),
                    ],
                    Sense::Ge,
                    0.0,
                )?;
            }
        }
    }

    // Per-slot loss lower bounds over the state's island decomposition.
    for (s, scen) in inst.scenarios.scenarios.iter().enumerate().skip(1) {
        let c = scen.state;
        let entry = &inst.catalog.per_state[c];
        let ss = s.to_string();
        for t in 0..periods {
            let ts = t.to_string();
            for d in 0..n_days {
                let sum_f = window_load_factor(topo, t, d, scen.duration_periods);
                let mut terms = vec![(loss[t][d][s], 1.0)];
                for (j, combo) in entry.combos.iter().enumerate() {
                    for (e, island) in combo.islands.iter().enumerate() {
                        terms.push((l_isl[c][j][e], -delta * sum_f));
                        for (k, &hi) in island.storage.iter().enumerate() {
                            let weight = match scen.class {
                                ScenarioClass::Routine => inst.profiles.get(hi, t, d),
                                ScenarioClass::Resilience => 1.0,
                            };
                            terms.push((aux[c][j][e][k], weight));
                        }
                    }
                }
                m.add_constraint(
                    name("loss_bound", &[&ts, &d.to_string(), &ss]),
                    &terms,
                    Sense::Ge,
                    0.0,
                )?;
            }
        }
    }

    // Exactly one combination per state, linked to the line binaries.
    for (c, entry) in inst.catalog.per_state.iter().enumerate() {
        let cs = c.to_string();
        let pick: Vec<(VarId, f64)> = x_ind[c].iter().map(|&v| (v, 1.0)).collect();
        m.add_constraint(name("pick_one", &[&cs]), &pick, Sense::Eq, 1.0)?;
        for (j, combo) in entry.combos.iter().enumerate() {
            let js = j.to_string();
            // Mismatch count: built lines outside the combination plus
            // unbuilt lines inside it; with M = 1 the indicator is forced
            // to one exactly when the count is zero.
            let on_count = combo.lines_on.len() as f64;
            let mut lo = vec![(x_ind[c][j], 1.0)];
            let mut hi = vec![(x_ind[c][j], 1.0)];
            for &li in &combo.lines_on {
                lo.push((x_line[&li], -1.0));
                hi.push((x_line[&li], 1.0));
            }
            for &li in &combo.lines_off {
                lo.push((x_line[&li], 1.0));
                hi.push((x_line[&li], -1.0));
            }
            m.add_constraint(name("combo_lo", &[&cs, &js]), &lo, Sense::Ge, 1.0 - on_count)?;
            m.add_constraint(name("combo_hi", &[&cs, &js]), &hi, Sense::Le, 1.0 + on_count)?;

            for (e, island) in combo.islands.iter().enumerate() {
                let es = e.to_string();
                let peak = island.peak_load_kw;
                m.add_constraint(
                    name("island_load_lo", &[&cs, &js, &es]),
                    &[(l_isl[c][j][e], 1.0), (x_ind[c][j], -peak)],
                    Sense::Ge,
                    0.0,
                )?;
                m.add_constraint(
                    name("island_load_hi", &[&cs, &js, &es]),
                    &[(l_isl[c][j][e], 1.0), (x_ind[c][j], peak)],
                    Sense::Le,
                    2.0 * peak,
                )?;
                for (k, &hi_idx) in island.storage.iter().enumerate() {
                    let h = &topo.storage[hi_idx];
                    let big_m = h.unit_energy_kwh() * h.size_cap.unwrap_or(1.0).max(1.0);
                    let hid = &h.id;
                    m.add_constraint(
                        name("aux_sel_lo", &[&cs, &js, &es, hid]),
                        &[
                            (soc_ref[hi_idx], 1.0),
                            (aux[c][j][e][k], -1.0),
                            (x_ind[c][j], -big_m),
                        ],
                        Sense::Ge,
                        -big_m,
                    )?;
                    m.add_constraint(
                        name("aux_sel_hi", &[&cs, &js, &es, hid]),
                        &[
                            (soc_ref[hi_idx], 1.0),
                            (aux[c][j][e][k], -1.0),
                            (x_ind[c][j], big_m),
                        ],
                        Sense::Le,
                        big_m,
                    )?;
                    m.add_constraint(
                        name("aux_off", &[&cs, &js, &es, hid]),
                        &[(aux[c][j][e][k], 1.0), (x_ind[c][j], -big_m)],
                        Sense::Le,
                        0.0,
                    )?;
                }
            }
        }
    }

    // Base-case operation.
    for t in 0..periods {
        let ts = t.to_string();
        for d in 0..n_days {
            let ds = d.to_string();
            for (ni, node) in topo.nodes.iter().enumerate() {
                let mut terms: Vec<(VarId, f64)> = Vec::new();
                for &li in &existing {
                    let l = &topo.lines[li];
                    if topo.node_index(&l.to_node).unwrap() == ni {
                        terms.push((flow[&(li, t, d)], 1.0));
                    }
                    if topo.node_index(&l.from_node).unwrap() == ni {
                        terms.push((flow[&(li, t, d)], -1.0));
                    }
                }
                if node.is_substation {
                    terms.push((inj[&(ni, t, d)], 1.0));
                    m.add_constraint(
                        name("balance_ss", &[&node.id, &ts, &ds]),
                        &terms,
                        Sense::Eq,
                        0.0,
                    )?;
                } else {
                    for (hi, h) in topo.storage.iter().enumerate() {
                        if topo.node_index(&h.node).unwrap() == ni {
                            terms.push((p_in[&(hi, t, d)], -1.0));
                            terms.push((p_out[&(hi, t, d)], 1.0));
                        }
                    }
                    terms.push((d_neg[&(ni, t, d)], 1.0));
                    terms.push((d_pos[&(ni, t, d)], -1.0));
                    m.add_constraint(
                        name("balance", &[&node.id, &ts, &ds]),
                        &terms,
                        Sense::Eq,
                        topo.demand_by_index(ni, t, d),
                    )?;
                }
            }
            for &li in &existing {
                let l = &topo.lines[li];
                let nf = topo.node_index(&l.from_node).unwrap();
                let nt = topo.node_index(&l.to_node).unwrap();
                m.add_constraint(
                    name("ohm", &[&l.id, &ts, &ds]),
                    &[
                        (flow[&(li, t, d)], l.impedance_per_len * l.length_mi),
                        (volt[&(nf, t, d)], -1.0),
                        (volt[&(nt, t, d)], 1.0),
                    ],
                    Sense::Eq,
                    0.0,
                )?;
            }
            for (hi, h) in topo.storage.iter().enumerate() {
                let prev = if t == 0 {
                    soc0[&(hi, d)]
                } else {
                    soc[&(hi, t - 1, d)]
                };
                m.add_constraint(
                    name("soc_dyn", &[&h.id, &ts, &ds]),
                    &[
                        (soc[&(hi, t, d)], 1.0),
                        (prev, -1.0),
                        (p_in[&(hi, t, d)], -h.round_trip_eff * delta),
                        (p_out[&(hi, t, d)], delta),
                    ],
                    Sense::Eq,
                    0.0,
                )?;
                m.add_constraint(
                    name("soc_pin", &[&h.id, &ts, &ds]),
                    &[
                        (soc[&(hi, t, d)], 1.0),
                        (soc_ref[hi], -inst.profiles.get(hi, t, d)),
                    ],
                    Sense::Eq,
                    0.0,
                )?;
                if h.status == AssetStatus::Candidate {
                    m.add_constraint(
                        name("pin_cap", &[&h.id, &ts, &ds]),
                        &[(p_in[&(hi, t, d)], 1.0), (x_var[&hi], -h.p_in_max_kw)],
                        Sense::Le,
                        0.0,
                    )?;
                    m.add_constraint(
                        name("pout_cap", &[&h.id, &ts, &ds]),
                        &[(p_out[&(hi, t, d)], 1.0), (x_var[&hi], -h.p_out_max_kw)],
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
                name("soc_cycle", &[&h.id, &ds]),
                &[(soc[&(hi, periods - 1, d)], 1.0), (soc0[&(hi, d)], -1.0)],
                Sense::Eq,
                0.0,
            )?;
        }
    }

    Ok(m)
}

/// Fix a plan's investment decisions into a built model: line binaries,
/// storage binaries, and the continuous sizing variables.
pub fn fix_plan(model: &mut MilpModel, topo: &NetworkTopology, plan: &InvestmentPlan) -> Result<()> {
    for li in topo.candidate_lines() {
        let l = &topo.lines[li];
        let v = model
            .var_id(&name("xL", &[&l.id]))
            .ok_or_else(|| Error::Model(format!("model lacks xL({})", l.id)))?;
        let built = plan.built_lines.contains(&l.id);
        model.fix_var(v, if built { 1.0 } else { 0.0 })?;
    }
    for hi in topo.candidate_storage() {
        let h = &topo.storage[hi];
        let energy = plan.storage_kwh.get(&h.id).copied().unwrap_or(0.0);
        let f = model
            .var_id(&name("xSf", &[&h.id]))
            .ok_or_else(|| Error::Model(format!("model lacks xSf({})", h.id)))?;
        let v = model
            .var_id(&name("xSv", &[&h.id]))
            .ok_or_else(|| Error::Model(format!("model lacks xSv({})", h.id)))?;
        model.fix_var(f, if energy > 0.0 { 1.0 } else { 0.0 })?;
        model.fix_var(v, energy / h.unit_energy_kwh())?;
    }
    Ok(())
}

/// Decoded plan plus its cost breakdown: the exact column set of the
/// results table (expected and CVaR loss-of-load cost, investment totals,
/// installed storage energy).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanOutcome {
    pub plan: InvestmentPlan,
    pub lambda: f64,
    pub voll_usd_per_kwh: f64,
    pub line_investment_usd: f64,
    pub storage_investment_usd: f64,
    pub lines_built: usize,
    pub storage_kwh_total: f64,
    pub expected_loss_cost_usd_per_year: f64,
    pub cvar_loss_cost_usd_per_year: f64,
    pub base_imbalance_cost_usd_per_year: f64,
    pub objective_usd: f64,
    pub status: SolveStatus,
    pub instance_hash: String,
}

/// Decode a solve result into investment decisions and reconcile the cost
/// breakdown. Loss-of-load costs are recomputed from the plan through the
/// closed-form evaluator (the model prices losses identically by
/// construction), so the breakdown is exact even where the solver left
/// slack in non-binding loss variables.
pub fn decode_solution(inst: &ScalableInstance, result: &SolveResult) -> Result<PlanOutcome> {
    if !result.status.has_solution() {
        return Err(Error::Solver(format!(
            "cannot decode a solve with status {:?}",
            result.status
        )));
    }
    let topo = inst.topology;
    let mut built_lines = BTreeSet::new();
    let mut line_cost = 0.0;
    for li in topo.candidate_lines() {
        let l = &topo.lines[li];
        if result.expect_value(&name("xL", &[&l.id]))? > 0.5 {
            built_lines.insert(l.id.clone());
            line_cost += l.fixed_cost_usd.unwrap_or(0.0);
        }
    }
    let mut storage_kwh = BTreeMap::new();
    let mut storage_cost = 0.0;
    let mut storage_total = 0.0;
    for hi in topo.candidate_storage() {
        let h = &topo.storage[hi];
        let fix = result.expect_value(&name("xSf", &[&h.id]))?;
        let sizing = result.expect_value(&name("xSv", &[&h.id]))?;
        let energy = sizing * h.unit_energy_kwh();
        if fix > 0.5 {
            storage_cost += h.fixed_cost_usd.unwrap_or(0.0)
                + h.var_cost_usd_per_kwh.unwrap_or(0.0) * energy;
            if energy > 0.0 {
                storage_kwh.insert(h.id.clone(), energy);
                storage_total += energy;
            }
        }
    }
    let plan = InvestmentPlan {
        built_lines,
        storage_kwh,
    };

    let mut econ = topo.economic.clone();
    econ.voll_usd_per_kwh = inst.voll_usd_per_kwh;
    econ.cvar_alpha = inst.cvar_alpha;
    let losses = evaluate_plan(
        topo,
        &plan,
        inst.catalog,
        inst.profiles,
        inst.scenarios,
        &econ,
    )?;

    // Base-case imbalance from the solution's own columns.
    let delta = topo.delta_hours();
    let pf_voll = econ.power_factor * inst.voll_usd_per_kwh;
    let mut base = 0.0;
    for t in 0..topo.periods() {
        let ts = t.to_string();
        for (d, day) in topo.typical_days.iter().enumerate() {
            let ds = d.to_string();
            for node in topo.nodes.iter().filter(|n| !n.is_substation) {
                let dn = result.expect_value(&name("dneg", &[&node.id, &ts, &ds]))?;
                let dp = result.expect_value(&name("dpos", &[&node.id, &ts, &ds]))?;
                base += day.weight_days_per_year * pf_voll * delta * (dn + dp);
            }
        }
    }

    let lines_built = plan.built_lines.len();
    Ok(PlanOutcome {
        plan,
        lambda: inst.lambda,
        voll_usd_per_kwh: inst.voll_usd_per_kwh,
        line_investment_usd: line_cost,
        storage_investment_usd: storage_cost,
        lines_built,
        storage_kwh_total: storage_total,
        expected_loss_cost_usd_per_year: losses.expected_cost_usd,
        cvar_loss_cost_usd_per_year: losses.cvar_cost_usd,
        base_imbalance_cost_usd_per_year: base,
        objective_usd: result
            .objective
            .ok_or_else(|| Error::Solver("solution lacks an objective".into()))?,
        status: result.status,
        instance_hash: result.instance_hash.clone(),
    })
}
