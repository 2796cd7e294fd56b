//! Build the scalable planning model, export it as MPS, and read it back
//! with the independent parser.
//!
//! ```sh
//! cargo run --example export_mps
//! ```

use gridplan::formulation::{build_scalable_model, ScalableInstance};
use gridplan::islanding::build_catalog;
use gridplan::milp::{parse_mps, MpsFormat};
use gridplan::model::{load_network, NetworkFormat};
use gridplan::scenario::{load_extreme_events, load_outage_rates, ScenarioSet};
use gridplan::soc::compute_profiles;
use std::path::Path;

fn main() -> gridplan::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/toy");
    let topo = load_network(&data, NetworkFormat::CsvDir)?;
    let rates = load_outage_rates(&data.join("outage_rates.csv"))?;
    let events = load_extreme_events(&data.join("extreme_events.json"))?;
    let scenarios = ScenarioSet::build_from_rates(&topo, &rates, &events)?;
    let catalog = build_catalog(&topo, &scenarios.states, 16)?;
    let profiles = compute_profiles(&topo)?;
    let inst = ScalableInstance::new(&topo, &scenarios, &catalog, &profiles)?;
    let model = build_scalable_model(&inst)?;

    println!(
        "model {}: {} variables, {} constraints, instance hash {}",
        model.name,
        model.num_vars(),
        model.num_constrs(),
        &model.instance_hash()[..16],
    );
    for (fam, n) in model.constr_family_counts() {
        println!("  {fam:<16} {n:>5} rows");
    }

    let path = std::env::temp_dir().join("gridplan_toy.mps");
    let doc = model.export_mps(&path, MpsFormat::Free)?;
    println!("wrote {} ({} bytes)", path.display(), doc.text.len());
    let fixed = model.to_mps(MpsFormat::Fixed);
    println!(
        "fixed-format names are capped at 8 chars, e.g. {:?} -> {:?}",
        model.vars()[model.num_vars() - 1].name,
        fixed.var_names[model.num_vars() - 1],
    );

    let parsed = parse_mps(&doc.text)?;
    assert_eq!(parsed.vars.len(), model.num_vars());
    assert_eq!(parsed.rows.len(), model.num_constrs());
    println!("independent parse reproduced every row and column");
    Ok(())
}
