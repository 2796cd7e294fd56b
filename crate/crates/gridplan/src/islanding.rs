//! Post-failure connectivity analysis.
//!
//! For a failure state (a set of out-of-service existing lines) and a set
//! of built candidate lines, the surviving graph splits into components. A
//! component holding a substation stays energized; every other component is
//! an island whose load is shed unless storage inside it covers the demand.
//!
//! Per state, only a small set of candidate lines can change that
//! partition (the relevant candidates); the catalog enumerates all of
//! their build combinations once so the optimization never touches the
//! graph again.

use crate::error::{Error, Result};
use crate::model::{AssetStatus, NetworkTopology};
use serde::Serialize;
use std::collections::BTreeSet;

/// Union-find over node indices.
struct DisjointSets {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

/// A de-energized component: its buses, the storage sitting on them, and
/// the summed peak demand.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Island {
    /// Node indices, sorted.
    pub buses: Vec<usize>,
    /// Storage indices (existing and candidate) at islanded buses, sorted.
    pub storage: Vec<usize>,
    pub peak_load_kw: f64,
}

/// One build combination of the relevant candidates of a state.
#[derive(Debug, Clone, Serialize)]
pub struct RelevantInvestment {
    /// Candidate line indices built in this combination, sorted.
    pub lines_on: Vec<usize>,
    /// The remaining relevant candidates, sorted.
    pub lines_off: Vec<usize>,
    pub islands: Vec<Island>,
}

/// All combinations for one failure state.
#[derive(Debug, Clone, Serialize)]
pub struct StateEntry {
    /// Relevant candidate line indices, sorted by line id; combination
    /// `j` builds exactly the candidates whose bit is set in `j`.
    pub relevant: Vec<usize>,
    pub combos: Vec<RelevantInvestment>,
}

/// Island decompositions for every failure state of a scenario set.
#[derive(Debug, Clone, Serialize)]
pub struct IslandCatalog {
    pub per_state: Vec<StateEntry>,
}

/// Partition the grid after removing `failed_lines` (existing-line
/// indices) and adding `built_candidates` (candidate-line indices).
/// Returns the energized flag per node and the islands.
pub fn energized_components(
    topology: &NetworkTopology,
    failed_lines: &[usize],
    built_candidates: &[usize],
) -> (Vec<bool>, Vec<Island>) {
    let n = topology.nodes.len();
    let failed: BTreeSet<usize> = failed_lines.iter().copied().collect();
    let built: BTreeSet<usize> = built_candidates.iter().copied().collect();
    let mut sets = DisjointSets::new(n);
    for (li, l) in topology.lines.iter().enumerate() {
        let active = match l.status {
            AssetStatus::Existing => !failed.contains(&li),
            AssetStatus::Candidate => built.contains(&li),
        };
        if active {
            let a = topology.node_index(&l.from_node).unwrap();
            let b = topology.node_index(&l.to_node).unwrap();
            sets.union(a, b);
        }
    }
    let mut energized_root = vec![false; n];
    for (ni, node) in topology.nodes.iter().enumerate() {
        if node.is_substation {
            let r = sets.find(ni);
            energized_root[r] = true;
        }
    }
    let mut energized = vec![false; n];
    let mut island_of_root: Vec<Option<usize>> = vec![None; n];
    let mut islands: Vec<Island> = Vec::new();
    for ni in 0..n {
        let r = sets.find(ni);
        if energized_root[r] {
            energized[ni] = true;
            continue;
        }
        let idx = *island_of_root[r].get_or_insert_with(|| {
            islands.push(Island {
                buses: Vec::new(),
                storage: Vec::new(),
                peak_load_kw: 0.0,
            });
            islands.len() - 1
        });
        islands[idx].buses.push(ni);
        islands[idx].peak_load_kw += topology.nodes[ni].peak_demand_kw;
    }
    for (hi, h) in topology.storage.iter().enumerate() {
        let ni = topology.node_index(&h.node).unwrap();
        if !energized[ni] {
            let r = sets.find(ni);
            let idx = island_of_root[r].expect("islanded node must have an island");
            islands[idx].storage.push(hi);
        }
    }
    (energized, islands)
}

/// Candidate lines that can change the islanding outcome of `state`.
///
/// A candidate qualifies when its endpoints sit in different components of
/// the post-failure graph and at least one of those components is
/// de-energized. The check is re-run with all previously qualified
/// candidates built until the set stops growing, so chains (a candidate
/// that only matters once another is built) are captured.
pub fn relevant_candidates(topology: &NetworkTopology, failed_lines: &[usize]) -> Vec<usize> {
    let mut relevant: BTreeSet<usize> = BTreeSet::new();
    loop {
        let built: Vec<usize> = relevant.iter().copied().collect();
        let (energized, islands) = energized_components(topology, failed_lines, &built);
        let mut comp_of = vec![usize::MAX; topology.nodes.len()];
        for (k, isl) in islands.iter().enumerate() {
            for &b in &isl.buses {
                comp_of[b] = k;
            }
        }
        // Energized nodes share one merged label: joining them changes
        // neither the energized set nor any island.
        let mut grew = false;
        for li in topology.candidate_lines() {
            if relevant.contains(&li) {
                continue;
            }
            let l = &topology.lines[li];
            let a = topology.node_index(&l.from_node).unwrap();
            let b = topology.node_index(&l.to_node).unwrap();
            let touches_island = !energized[a] || !energized[b];
            let distinct = match (energized[a], energized[b]) {
                (true, true) => false,
                (false, false) => comp_of[a] != comp_of[b],
                _ => true,
            };
            if touches_island && distinct {
                relevant.insert(li);
                grew = true;
            }
        }
        if !grew {
            break;
        }
    }
    let mut out: Vec<usize> = relevant.into_iter().collect();
    out.sort_by(|&a, &b| topology.lines[a].id.cmp(&topology.lines[b].id));
    out
}

pub const DEFAULT_COMBINATION_CAP: usize = 16;

/// Enumerate the island decomposition of every state for every build
/// combination of its relevant candidates. Deterministic: states keep
/// their input order, candidates are sorted by line id, and combination
/// `j` is the bit mask over that order.
pub fn build_catalog(
    topology: &NetworkTopology,
    states: &[crate::scenario::FailureState],
    combination_cap: usize,
) -> Result<IslandCatalog> {
    let mut per_state = Vec::with_capacity(states.len());
    for (ci, state) in states.iter().enumerate() {
        let relevant = relevant_candidates(topology, &state.failed_lines);
        if relevant.len() > combination_cap {
            return Err(Error::SizeGuard {
                what: format!(
                    "relevant candidates of state {ci} (lines {:?})",
                    state
                        .failed_lines
                        .iter()
                        .map(|&l| topology.lines[l].id.clone())
                        .collect::<Vec<_>>()
                ),
                size: relevant.len(),
                cap: combination_cap,
            });
        }
        let mut combos = Vec::with_capacity(1 << relevant.len());
        for mask in 0u32..(1u32 << relevant.len()) {
            let lines_on: Vec<usize> = relevant
                .iter()
                .enumerate()
                .filter(|&(bit, _)| mask & (1 << bit) != 0)
                .map(|(_, &li)| li)
                .collect();
            let lines_off: Vec<usize> = relevant
                .iter()
                .copied()
                .filter(|li| !lines_on.contains(li))
                .collect();
            let (_, islands) = energized_components(topology, &state.failed_lines, &lines_on);
            combos.push(RelevantInvestment {
                lines_on,
                lines_off,
                islands,
            });
        }
        per_state.push(StateEntry { relevant, combos });
    }
    Ok(IslandCatalog { per_state })
}

impl IslandCatalog {
    /// Combination index selected by a plan's built candidate set.
    pub fn combo_for_plan(&self, state: usize, built: &BTreeSet<usize>) -> usize {
        let entry = &self.per_state[state];
        let mut mask = 0usize;
        for (bit, li) in entry.relevant.iter().enumerate() {
            if built.contains(li) {
                mask |= 1 << bit;
            }
        }
        mask
    }

    /// Human-readable JSON dump with asset ids instead of indices.
    pub fn to_json(&self, topology: &NetworkTopology) -> serde_json::Value {
        let states: Vec<serde_json::Value> = self
            .per_state
            .iter()
            .map(|entry| {
                serde_json::json!({
                    "relevant_candidates": entry.relevant.iter()
                        .map(|&li| topology.lines[li].id.clone()).collect::<Vec<_>>(),
                    "combinations": entry.combos.iter().map(|c| serde_json::json!({
                        "built": c.lines_on.iter().map(|&li| topology.lines[li].id.clone()).collect::<Vec<_>>(),
                        "islands": c.islands.iter().map(|isl| serde_json::json!({
                            "buses": isl.buses.iter().map(|&ni| topology.nodes[ni].id.clone()).collect::<Vec<_>>(),
                            "storage": isl.storage.iter().map(|&hi| topology.storage[hi].id.clone()).collect::<Vec<_>>(),
                            "peak_load_kw": isl.peak_load_kw,
                        })).collect::<Vec<_>>(),
                    })).collect::<Vec<_>>(),
                })
            })
            .collect();
        serde_json::json!({ "states": states })
    }
}
