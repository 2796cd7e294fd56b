//! Shared fixtures and independent oracles for the integration suites.
//!
//! The oracles here deliberately avoid the code paths they check: the
//! connectivity oracle is a breadth-first search (the crate uses
//! union-find); the planning oracle enumerates investment plans and sizes
//! storage with a directly-assembled epigraph LP over microlp (the crate
//! builds one MILP and branches); losses come from first principles via
//! `energized_components` on the raw built set, bypassing the relevance
//! catalog.

#![allow(dead_code)]

use gridplan::islanding::{build_catalog, energized_components, IslandCatalog};
use gridplan::model::{
    AssetStatus, EconomicParams, Line, NetworkTopology, Node, StorageDevice, TypicalDay,
};
use gridplan::scenario::{ScenarioClass, ScenarioSet, ScenarioSpec};
use gridplan::sim::InvestmentPlan;
use gridplan::soc::SocProfile;
use microlp::{ComparisonOp, OptimizationDirection, Problem};
use std::collections::{BTreeMap, BTreeSet};

pub fn node(id: &str, peak: f64, customers: u64) -> Node {
    Node {
        id: id.into(),
        is_substation: false,
        peak_demand_kw: peak,
        customers,
        injection_limit_kw: None,
    }
}

pub fn substation(id: &str, limit: f64) -> Node {
    Node {
        id: id.into(),
        is_substation: true,
        peak_demand_kw: 0.0,
        customers: 0,
        injection_limit_kw: Some(limit),
    }
}

pub fn existing(id: &str, from: &str, to: &str) -> Line {
    Line {
        id: id.into(),
        from_node: from.into(),
        to_node: to.into(),
        impedance_per_len: 1e-6,
        length_mi: 1.0,
        capacity_kw: 50_000.0,
        status: AssetStatus::Existing,
        fixed_cost_usd: None,
    }
}

pub fn candidate(id: &str, from: &str, to: &str, cost: f64) -> Line {
    Line {
        id: id.into(),
        from_node: from.into(),
        to_node: to.into(),
        impedance_per_len: 1e-6,
        length_mi: 1.0,
        capacity_kw: 50_000.0,
        status: AssetStatus::Candidate,
        fixed_cost_usd: Some(cost),
    }
}

pub fn existing_storage(id: &str, at: &str, p_kw: f64, hours: f64) -> StorageDevice {
    StorageDevice {
        id: id.into(),
        node: at.into(),
        status: AssetStatus::Existing,
        p_in_max_kw: p_kw,
        p_out_max_kw: p_kw,
        round_trip_eff: 0.9,
        hours_to_full: hours,
        fixed_cost_usd: None,
        var_cost_usd_per_kwh: None,
        size_cap: None,
    }
}

pub fn candidate_storage(
    id: &str,
    at: &str,
    p_kw: f64,
    hours: f64,
    fix_usd: f64,
    var_usd_per_kwh: f64,
    cap: f64,
) -> StorageDevice {
    StorageDevice {
        id: id.into(),
        node: at.into(),
        status: AssetStatus::Candidate,
        p_in_max_kw: p_kw,
        p_out_max_kw: p_kw,
        round_trip_eff: 0.9,
        hours_to_full: hours,
        fixed_cost_usd: Some(fix_usd),
        var_cost_usd_per_kwh: Some(var_usd_per_kwh),
        size_cap: Some(cap),
    }
}

pub fn six_period_days() -> Vec<TypicalDay> {
    vec![
        TypicalDay {
            id: "winter".into(),
            weight_days_per_year: 182.0,
            hours_per_period: 4.0,
            load_factor: vec![0.3, 0.5, 0.8, 1.0, 0.7, 0.4],
            price_usd_per_kwh: vec![0.02, 0.03, 0.06, 0.09, 0.07, 0.03],
        },
        TypicalDay {
            id: "summer".into(),
            weight_days_per_year: 183.0,
            hours_per_period: 4.0,
            load_factor: vec![0.4, 0.6, 0.9, 1.0, 0.8, 0.5],
            price_usd_per_kwh: vec![0.03, 0.04, 0.08, 0.1, 0.06, 0.03],
        },
    ]
}

pub fn econ(voll: f64, lambda: f64, alpha: f64) -> EconomicParams {
    EconomicParams {
        voll_usd_per_kwh: voll,
        power_factor: 0.95,
        lambda_risk: lambda,
        cvar_alpha: alpha,
        v_min: 0.95,
        v_max: 1.05,
    }
}

/// A fixture bundles everything the planning stack consumes.
pub struct Fixture {
    pub name: &'static str,
    pub topology: NetworkTopology,
    pub scenarios: ScenarioSet,
    pub catalog: IslandCatalog,
    pub profiles: SocProfile,
}

fn assemble(
    name: &'static str,
    nodes: Vec<Node>,
    lines: Vec<Line>,
    storage: Vec<StorageDevice>,
    specs: Vec<ScenarioSpec>,
    economic: EconomicParams,
) -> Fixture {
    let topology =
        NetworkTopology::new(nodes, lines, storage, six_period_days(), economic).unwrap();
    let scenarios = ScenarioSet::build(&topology, &specs).unwrap();
    let catalog = build_catalog(&topology, &scenarios.states, 16).unwrap();
    let profiles = gridplan::soc::compute_profiles(&topology).unwrap();
    Fixture {
        name,
        topology,
        scenarios,
        catalog,
        profiles,
    }
}

fn spec(lines: &[&str], k: usize, class: ScenarioClass, p: f64) -> ScenarioSpec {
    ScenarioSpec {
        failed_line_ids: lines.iter().map(|s| s.to_string()).collect(),
        duration_periods: k,
        class,
        probability: p,
    }
}

/// Two radial arms off one substation; one tie per arm plus a cross tie.
pub fn fixture_two_arms() -> Fixture {
    let nodes = vec![
        substation("sub", 50_000.0),
        node("a1", 120.0, 60),
        node("a2", 200.0, 90),
        node("a3", 80.0, 30),
        node("b1", 150.0, 70),
        node("b2", 90.0, 45),
    ];
    let lines = vec![
        existing("sa1", "sub", "a1"),
        existing("a12", "a1", "a2"),
        existing("a23", "a2", "a3"),
        existing("sb1", "sub", "b1"),
        existing("b12", "b1", "b2"),
        candidate("tie_a", "sub", "a2", 9_000.0),
        candidate("tie_x", "a3", "b2", 14_000.0),
    ];
    let storage = vec![
        existing_storage("es_b1", "b1", 30.0, 4.0),
        candidate_storage("cs_a3", "a3", 60.0, 4.0, 2_000.0, 40.0, 2.0),
    ];
    let specs = vec![
        spec(&["sa1"], 1, ScenarioClass::Routine, 6e-4),
        spec(&["a12"], 2, ScenarioClass::Routine, 4e-4),
        spec(&["sb1"], 1, ScenarioClass::Routine, 2e-4),
        spec(&["sa1", "sb1"], 3, ScenarioClass::Resilience, 5e-5),
    ];
    assemble(
        "two_arms",
        nodes,
        lines,
        storage,
        specs,
        econ(1.5, 0.5, 0.95),
    )
}

/// Chain relevance: the second candidate only matters once the first is
/// built.
pub fn fixture_chain() -> Fixture {
    let nodes = vec![
        substation("sub", 50_000.0),
        node("a", 100.0, 50),
        node("b", 180.0, 80),
        node("c", 140.0, 60),
    ];
    let lines = vec![
        existing("e1", "sub", "a"),
        existing("e2", "a", "b"),
        existing("e3", "b", "c"),
        candidate("k1", "sub", "b", 7_000.0),
        candidate("k2", "b", "c", 5_000.0),
    ];
    let storage = vec![candidate_storage("cs_c", "c", 50.0, 4.0, 1_500.0, 35.0, 2.0)];
    let specs = vec![
        spec(&["e2", "e3"], 2, ScenarioClass::Routine, 5e-4),
        spec(&["e1"], 1, ScenarioClass::Routine, 3e-4),
        spec(&["e2", "e3"], 4, ScenarioClass::Resilience, 6e-5),
    ];
    assemble("chain", nodes, lines, storage, specs, econ(1.5, 0.5, 0.95))
}

/// Two substations with a meshed corridor and a spur.
pub fn fixture_two_subs() -> Fixture {
    let nodes = vec![
        substation("s1", 50_000.0),
        substation("s2", 50_000.0),
        node("x1", 160.0, 75),
        node("x2", 220.0, 100),
        node("x3", 90.0, 40),
        node("x4", 60.0, 25),
    ];
    let lines = vec![
        existing("s1x1", "s1", "x1"),
        existing("x1x2", "x1", "x2"),
        existing("s2x2", "s2", "x2"),
        existing("x2x3", "x2", "x3"),
        existing("x3x4", "x3", "x4"),
        candidate("t13", "x1", "x3", 11_000.0),
        candidate("t24", "s2", "x4", 13_000.0),
    ];
    let storage = vec![
        existing_storage("es_x3", "x3", 25.0, 4.0),
        candidate_storage("cs_x4", "x4", 40.0, 4.0, 1_800.0, 45.0, 1.5),
    ];
    let specs = vec![
        spec(&["x2x3"], 2, ScenarioClass::Routine, 7e-4),
        spec(&["x3x4"], 1, ScenarioClass::Routine, 5e-4),
        spec(&["x1x2", "s2x2"], 1, ScenarioClass::Routine, 1e-4),
        spec(&["x2x3", "x3x4"], 4, ScenarioClass::Resilience, 4e-5),
    ];
    assemble(
        "two_subs",
        nodes,
        lines,
        storage,
        specs,
        econ(1.5, 0.5, 0.95),
    )
}

/// Routine and resilience duplicates of the same failure state with two
/// storage devices sharing one island.
pub fn fixture_storage_heavy() -> Fixture {
    let nodes = vec![
        substation("sub", 50_000.0),
        node("m1", 130.0, 55),
        node("m2", 240.0, 110),
        node("m3", 70.0, 35),
    ];
    let lines = vec![
        existing("f1", "sub", "m1"),
        existing("f2", "m1", "m2"),
        existing("f3", "m2", "m3"),
        candidate("tie_m", "sub", "m3", 12_000.0),
    ];
    let storage = vec![
        existing_storage("es_m2", "m2", 45.0, 4.0),
        candidate_storage("cs_m3", "m3", 55.0, 4.0, 2_200.0, 42.0, 2.0),
    ];
    let specs = vec![
        spec(&["f2"], 2, ScenarioClass::Routine, 8e-4),
        spec(&["f2"], 2, ScenarioClass::Resilience, 8e-4),
        spec(&["f1"], 1, ScenarioClass::Routine, 2e-4),
    ];
    assemble(
        "storage_heavy",
        nodes,
        lines,
        storage,
        specs,
        econ(1.5, 0.5, 0.95),
    )
}

/// Larger radial tree: three candidates, two storage sites, six states.
pub fn fixture_tree() -> Fixture {
    let nodes = vec![
        substation("root", 80_000.0),
        node("t1", 110.0, 50),
        node("t2", 95.0, 40),
        node("t3", 170.0, 85),
        node("t4", 60.0, 20),
        node("t5", 140.0, 65),
        node("t6", 75.0, 30),
        node("t7", 55.0, 22),
        node("t8", 125.0, 58),
    ];
    let lines = vec![
        existing("r1", "root", "t1"),
        existing("r2", "root", "t2"),
        existing("e13", "t1", "t3"),
        existing("e34", "t3", "t4"),
        existing("e25", "t2", "t5"),
        existing("e56", "t5", "t6"),
        existing("e67", "t6", "t7"),
        existing("e58", "t5", "t8"),
        candidate("c14", "root", "t4", 8_500.0),
        candidate("c78", "t7", "t8", 6_500.0),
        candidate("c36", "t3", "t6", 10_500.0),
    ];
    let storage = vec![
        existing_storage("es_t5", "t5", 35.0, 4.0),
        candidate_storage("cs_t3", "t3", 45.0, 4.0, 1_700.0, 38.0, 2.0),
    ];
    let specs = vec![
        spec(&["e13"], 2, ScenarioClass::Routine, 6e-4),
        spec(&["e25"], 1, ScenarioClass::Routine, 5e-4),
        spec(&["e56"], 2, ScenarioClass::Routine, 4e-4),
        spec(&["e58"], 1, ScenarioClass::Routine, 3e-4),
        spec(&["e13", "e25"], 3, ScenarioClass::Resilience, 5e-5),
        spec(&["e56", "e58"], 4, ScenarioClass::Resilience, 4e-5),
    ];
    assemble("tree", nodes, lines, storage, specs, econ(1.5, 0.5, 0.95))
}

pub fn all_fixtures() -> Vec<Fixture> {
    vec![
        fixture_two_arms(),
        fixture_chain(),
        fixture_two_subs(),
        fixture_storage_heavy(),
        fixture_tree(),
    ]
}

/// Independent connectivity oracle: breadth-first search from every
/// substation over active lines.
pub fn bfs_energized(
    topology: &NetworkTopology,
    failed: &BTreeSet<usize>,
    built: &BTreeSet<usize>,
) -> (Vec<bool>, Vec<Vec<usize>>) {
    let n = topology.nodes.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (li, l) in topology.lines.iter().enumerate() {
        let active = match l.status {
            AssetStatus::Existing => !failed.contains(&li),
            AssetStatus::Candidate => built.contains(&li),
        };
        if active {
            let a = topology.node_index(&l.from_node).unwrap();
            let b = topology.node_index(&l.to_node).unwrap();
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    let mut energized = vec![false; n];
    let mut queue: std::collections::VecDeque<usize> = (0..n)
        .filter(|&i| topology.nodes[i].is_substation)
        .collect();
    for &s in &queue {
        energized[s] = true;
    }
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !energized[v] {
                energized[v] = true;
                queue.push_back(v);
            }
        }
    }
    // Island partition of the de-energized remainder, each sorted, listed
    // in order of smallest member.
    let mut seen = energized.clone();
    let mut islands = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut comp = vec![start];
        seen[start] = true;
        let mut q = std::collections::VecDeque::from([start]);
        while let Some(u) = q.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    comp.push(v);
                    q.push_back(v);
                }
            }
        }
        comp.sort_unstable();
        islands.push(comp);
    }
    (energized, islands)
}

/// Loss of load for one scenario and start slot computed from first
/// principles: islands from the raw built set, window-summed load factors,
/// storage credit by class, aggregate clamp.
pub fn loss_from_scratch(
    topology: &NetworkTopology,
    plan: &InvestmentPlan,
    profiles: &SocProfile,
    failed: &[usize],
    class: ScenarioClass,
    duration: usize,
    t: usize,
    d: usize,
) -> f64 {
    let built: Vec<usize> = plan.built_line_indices(topology).into_iter().collect();
    let (_, islands) = energized_components(topology, failed, &built);
    let periods = topology.periods();
    let delta = topology.delta_hours();
    let window: Vec<usize> = (t..=(t + duration).min(periods - 1)).collect();
    let mut total = 0.0;
    for island in &islands {
        let sum_f: f64 = window
            .iter()
            .map(|&tau| topology.typical_days[d].load_factor[tau])
            .sum();
        total += delta * island.peak_load_kw * sum_f;
        for &hi in &island.storage {
            let w = match class {
                ScenarioClass::Routine => profiles.get(hi, t, d),
                ScenarioClass::Resilience => 1.0,
            };
            total -= plan.energy_kwh(topology, hi) * w;
        }
    }
    total.max(0.0)
}

/// Objective of the best plan found by brute force: enumerate every
/// candidate-line subset and storage-build subset, then size storage with
/// an epigraph LP whose loss coefficients come from `loss_from_scratch`
/// style first principles.
pub fn brute_force_optimum(fx: &Fixture, lambda: f64, voll: f64, alpha: f64) -> f64 {
    let topo = &fx.topology;
    let cand_lines: Vec<usize> = topo.candidate_lines().collect();
    let cand_storage: Vec<usize> = topo.candidate_storage().collect();
    let periods = topo.periods();
    let n_days = topo.typical_days.len();
    let delta = topo.delta_hours();
    let pf_voll = topo.economic.power_factor * voll;

    let mut best = f64::INFINITY;
    for line_mask in 0u32..(1 << cand_lines.len()) {
        let built: Vec<usize> = cand_lines
            .iter()
            .enumerate()
            .filter(|&(b, _)| line_mask & (1 << b) != 0)
            .map(|(_, &li)| li)
            .collect();
        let line_cost: f64 = built
            .iter()
            .map(|&li| topo.lines[li].fixed_cost_usd.unwrap())
            .sum();
        // Islands per failure state for this line plan.
        let islands_by_state: Vec<_> = fx
            .scenarios
            .states
            .iter()
            .map(|st| energized_components(topo, &st.failed_lines, &built).1)
            .collect();
        for sto_mask in 0u32..(1 << cand_storage.len()) {
            let chosen: Vec<usize> = cand_storage
                .iter()
                .enumerate()
                .filter(|&(b, _)| sto_mask & (1 << b) != 0)
                .map(|(_, &hi)| hi)
                .collect();
            let fix_cost: f64 = chosen
                .iter()
                .map(|&hi| topo.storage[hi].fixed_cost_usd.unwrap())
                .sum();

            // Storage sizing LP: energy per chosen device, loss epigraph
            // per slot and scenario, value-at-risk threshold per slot.
            let mut lp = Problem::new(OptimizationDirection::Minimize);
            let energy: BTreeMap<usize, microlp::Variable> = chosen
                .iter()
                .map(|&hi| {
                    let h = &topo.storage[hi];
                    (
                        hi,
                        lp.add_var(
                            h.var_cost_usd_per_kwh.unwrap(),
                            (0.0, h.max_energy_kwh()),
                        ),
                    )
                })
                .collect();
            let n_scen = fx.scenarios.num_scenarios();
            let mut loss_vars = vec![vec![vec![None; n_scen]; n_days]; periods];
            let mut psi_vars = vec![vec![vec![None; n_scen]; n_days]; periods];
            let mut zeta_vars = vec![vec![None; n_days]; periods];
            for t in 0..periods {
                for d in 0..n_days {
                    let w = topo.typical_days[d].weight_days_per_year;
                    let z = lp.add_var(lambda * pf_voll * w, (0.0, f64::INFINITY));
                    zeta_vars[t][d] = Some(z);
                    for (s, scen) in fx.scenarios.scenarios.iter().enumerate() {
                        let lv = lp.add_var(
                            (1.0 - lambda) * pf_voll * w * scen.probability,
                            (0.0, if s == 0 { 0.0 } else { f64::INFINITY }),
                        );
                        let pv = lp.add_var(
                            lambda * pf_voll * w * scen.probability / (1.0 - alpha),
                            (0.0, f64::INFINITY),
                        );
                        lp.add_constraint(
                            [(pv, 1.0), (z, 1.0), (lv, -1.0)],
                            ComparisonOp::Ge,
                            0.0,
                        );
                        loss_vars[t][d][s] = Some(lv);
                        psi_vars[t][d][s] = Some(pv);
                    }
                }
            }
            for (s, scen) in fx.scenarios.scenarios.iter().enumerate().skip(1) {
                let islands = &islands_by_state[scen.state];
                for t in 0..periods {
                    for d in 0..n_days {
                        let window = t..=(t + scen.duration_periods).min(periods - 1);
                        let sum_f: f64 = window
                            .map(|tau| topo.typical_days[d].load_factor[tau])
                            .sum();
                        let mut rhs = 0.0;
                        let mut terms = vec![(loss_vars[t][d][s].unwrap(), 1.0)];
                        for island in islands {
                            rhs += delta * island.peak_load_kw * sum_f;
                            for &hi in &island.storage {
                                let w = match scen.class {
                                    ScenarioClass::Routine => fx.profiles.get(hi, t, d),
                                    ScenarioClass::Resilience => 1.0,
                                };
                                match topo.storage[hi].status {
                                    AssetStatus::Existing => {
                                        rhs -= topo.storage[hi].unit_energy_kwh() * w;
                                    }
                                    AssetStatus::Candidate => {
                                        if let Some(&ev) = energy.get(&hi) {
                                            terms.push((ev, w));
                                        }
                                    }
                                }
                            }
                        }
                        lp.add_constraint(terms, ComparisonOp::Ge, rhs);
                    }
                }
            }
            let lp_cost = match lp.solve() {
                Ok(out) => out.solution().map(|s| s.objective()).unwrap_or(f64::INFINITY),
                Err(_) => f64::INFINITY,
            };
            best = best.min(line_cost + fix_cost + lp_cost);
        }
    }
    best
}
