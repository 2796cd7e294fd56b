//! One planning cell end to end with the scalable model: ingest, island
//! catalog, storage profiles, solve, decode.
//!
//! ```sh
//! cargo run --example plan_scalable
//! ```

use gridplan::formulation::{build_scalable_model, decode_solution, ScalableInstance};
use gridplan::islanding::build_catalog;
use gridplan::model::{load_network, NetworkFormat};
use gridplan::scenario::{load_extreme_events, load_outage_rates, ScenarioSet};
use gridplan::soc::compute_profiles;
use gridplan::solver::{solve, SolveConfig};
use std::path::Path;

fn main() -> gridplan::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/toy");
    let topo = load_network(&data, NetworkFormat::CsvDir)?;
    let rates = load_outage_rates(&data.join("outage_rates.csv"))?;
    let events = load_extreme_events(&data.join("extreme_events.json"))?;
    let scenarios = ScenarioSet::build_from_rates(&topo, &rates, &events)?;
    let catalog = build_catalog(&topo, &scenarios.states, 16)?;
    let profiles = compute_profiles(&topo)?;

    for lambda in [0.0, 0.5, 1.0] {
        let inst = ScalableInstance::new(&topo, &scenarios, &catalog, &profiles)?
            .with_lambda(lambda)
            .with_voll(5.0);
        let model = build_scalable_model(&inst)?;
        let result = solve(&model, &SolveConfig::default())?;
        let o = decode_solution(&inst, &result)?;
        println!(
            "lambda = {lambda}: build {:?}, storage {:?} ({} kWh), \
             invest ${:.0}+${:.0}, expected ${:.2}/yr, cvar ${:.2}/yr, solved in {:.2}s",
            o.plan.built_lines,
            o.plan.storage_kwh.keys().collect::<Vec<_>>(),
            o.storage_kwh_total,
            o.line_investment_usd,
            o.storage_investment_usd,
            o.expected_loss_cost_usd_per_year,
            o.cvar_loss_cost_usd_per_year,
            result.wall_time_s,
        );
    }
    Ok(())
}
