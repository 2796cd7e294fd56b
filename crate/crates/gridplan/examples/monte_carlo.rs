//! Out-of-sample Monte Carlo: hourly Bernoulli line failures over many
//! simulated years, comparing a plan against the no-investment baseline.
//!
//! ```sh
//! cargo run --example monte_carlo
//! ```

use gridplan::model::{load_network, NetworkFormat};
use gridplan::scenario::load_outage_rates;
use gridplan::sim::{run_monte_carlo, InvestmentPlan, McOptions};
use gridplan::soc::compute_profiles;
use std::collections::BTreeSet;
use std::path::Path;

fn main() -> gridplan::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/toy");
    let topo = load_network(&data, NetworkFormat::CsvDir)?;
    let rates = load_outage_rates(&data.join("outage_rates.csv"))?;
    let profiles = compute_profiles(&topo)?;

    let baseline = InvestmentPlan::none();
    let upgraded = InvestmentPlan {
        built_lines: BTreeSet::from(["tie_a".to_string()]),
        storage_kwh: [("cs_a3".to_string(), 240.0)].into_iter().collect(),
    };

    for (name, plan) in [("no investment", &baseline), ("tie_a + 240 kWh", &upgraded)] {
        let r = run_monte_carlo(&topo, plan, &rates, &profiles, 500, 42, &McOptions::default())?;
        println!("{name}:");
        println!(
            "  annual ENS kWh: avg {:.1}, cvar1% {:.1}, worst {:.1}",
            r.avg_annual_ens_kwh, r.cvar1_annual_ens_kwh, r.worst_annual_ens_kwh
        );
        println!(
            "  saifi: avg {:.4}, cvar5% {:.4}; saidi h: avg {:.4}, cvar5% {:.4}",
            r.avg_saifi, r.cvar5_saifi, r.avg_saidi_h, r.cvar5_saidi_h
        );
        let h = &r.hourly_ens_histogram;
        let nonzero: u64 = h.counts[1..].iter().sum();
        println!(
            "  hours with shed load: {nonzero} of {}",
            r.years * 8760
        );
    }
    Ok(())
}
