//! Compute the daily state-of-charge profiles storage follows under price
//! arbitrage, and round-trip them through CSV.
//!
//! ```sh
//! cargo run --example soc_profiles
//! ```

use gridplan::model::{load_network, NetworkFormat};
use gridplan::soc::{compute_profiles, SocProfile};
use std::path::Path;

fn main() -> gridplan::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/toy");
    let topo = load_network(&data, NetworkFormat::CsvDir)?;
    let profiles = compute_profiles(&topo)?;

    for (h, dev) in topo.storage.iter().enumerate() {
        println!("storage {} ({} kWh when fully built):", dev.id, dev.unit_energy_kwh());
        for (d, day) in topo.typical_days.iter().enumerate() {
            let row: Vec<String> = (0..topo.periods())
                .map(|t| format!("{:.2}", profiles.get(h, t, d)))
                .collect();
            println!("  {:<7} prices {:?}", day.id, day.price_usd_per_kwh);
            println!("  {:<7} soc    [{}]", "", row.join(", "));
        }
    }

    let out = std::env::temp_dir().join("gridplan_profiles.csv");
    profiles.save_csv(&topo, &out)?;
    let back = SocProfile::load_csv(&topo, &out)?;
    assert_eq!(profiles, back);
    println!("profiles round-tripped through {}", out.display());
    Ok(())
}
