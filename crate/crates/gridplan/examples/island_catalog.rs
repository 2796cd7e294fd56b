//! Build failure states from outage rates and extreme events, then
//! enumerate the island decomposition per state and relevant-candidate
//! combination.
//!
//! ```sh
//! cargo run --example island_catalog
//! ```

use gridplan::islanding::build_catalog;
use gridplan::model::{load_network, NetworkFormat};
use gridplan::scenario::{load_extreme_events, load_outage_rates, ScenarioSet};
use std::path::Path;

fn main() -> gridplan::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/toy");
    let topo = load_network(&data, NetworkFormat::CsvDir)?;
    let rates = load_outage_rates(&data.join("outage_rates.csv"))?;
    let events = load_extreme_events(&data.join("extreme_events.json"))?;
    let scenarios = ScenarioSet::build_from_rates(&topo, &rates, &events)?;
    println!(
        "{} scenarios over {} failure states (index 0 = no failure, residual probability {:.6})",
        scenarios.num_scenarios(),
        scenarios.states.len(),
        scenarios.scenarios[0].probability,
    );

    let catalog = build_catalog(&topo, &scenarios.states, 16)?;
    for (c, (state, entry)) in scenarios
        .states
        .iter()
        .zip(&catalog.per_state)
        .enumerate()
    {
        let failed: Vec<&str> = state
            .failed_lines
            .iter()
            .map(|&li| topo.lines[li].id.as_str())
            .collect();
        let relevant: Vec<&str> = entry
            .relevant
            .iter()
            .map(|&li| topo.lines[li].id.as_str())
            .collect();
        println!(
            "state {c}: failed {failed:?}, relevant candidates {relevant:?}, {} combinations",
            entry.combos.len()
        );
        for (j, combo) in entry.combos.iter().enumerate() {
            let built: Vec<&str> = combo
                .lines_on
                .iter()
                .map(|&li| topo.lines[li].id.as_str())
                .collect();
            let islands: Vec<String> = combo
                .islands
                .iter()
                .map(|i| {
                    format!(
                        "{{{} buses, {} kW}}",
                        i.buses.len(),
                        i.peak_load_kw
                    )
                })
                .collect();
            println!("  combo {j} built {built:?}: islands {islands:?}");
        }
    }
    Ok(())
}
