//! Load the bundled toy feeder from its CSV directory, validate it, and
//! query derived demand.
//!
//! ```sh
//! cargo run --example load_and_validate
//! ```

use gridplan::model::{load_network, NetworkFormat};
use std::path::Path;

fn main() -> gridplan::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/toy");
    let topo = load_network(&data, NetworkFormat::CsvDir)?;

    println!(
        "{} nodes ({} substations), {} lines ({} candidates), {} storage, {} typical days x {} periods",
        topo.nodes.len(),
        topo.nodes.iter().filter(|n| n.is_substation).count(),
        topo.lines.len(),
        topo.candidate_lines().count(),
        topo.storage.len(),
        topo.typical_days.len(),
        topo.periods(),
    );
    let total_peak: f64 = topo.nodes.iter().map(|n| n.peak_demand_kw).sum();
    let customers: u64 = topo.nodes.iter().map(|n| n.customers).sum();
    println!("peak load {total_peak} kW across {customers} customers");

    for (d, day) in topo.typical_days.iter().enumerate() {
        let peak_t = day
            .load_factor
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        println!(
            "day {:<7} (w = {:>3}): a2 demand at its peak period {} is {} kW",
            day.id,
            day.weight_days_per_year,
            peak_t + 1,
            topo.demand("a2", peak_t, d)?,
        );
    }
    Ok(())
}
