//! Out-of-sample Monte Carlo evaluation of a fixed plan.
//!
//! Per simulated year, each line draws an independent in-service/failed
//! Bernoulli trial for every hour (probability = annual rate / 8760).
//! Islanding is recomputed for hours with failures; energy not served
//! accrues islanded demand minus storage credit. A device's credit is
//! drawn once per contiguous islanded spell, at the profile-scaled state
//! of charge of the hour the spell starts, and is not replenished
//! mid-outage. An interruption, for SAIFI, is a maximal contiguous block
//! of islanded hours per bus.
//!
//! Years run in parallel on seeded substreams and are reduced in year
//! order, so a seed fully determines the report.

use crate::error::{Error, Result};
use crate::islanding::energized_components;
use crate::model::NetworkTopology;
use crate::scenario::OutageRate;
use crate::sim::evaluate::InvestmentPlan;
use crate::sim::cvar_equal;
use crate::soc::SocProfile;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const HOURS_PER_YEAR: usize = 8760;

#[derive(Debug, Clone, Default)]
pub struct McOptions {
    /// Extension beyond the hourly-independence convention: when set, a
    /// failure draw keeps the line out for its mean time to repair
    /// (rounded to whole hours) instead of a single hour.
    pub mean_repair_hours: Option<BTreeMap<String, f64>>,
}

/// Aggregated out-of-sample metrics. `cvar1` tails hold the worst 1% of
/// years, `cvar5` the worst 5%.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricReport {
    pub years: usize,
    pub seed: u64,
    pub avg_annual_ens_kwh: f64,
    pub cvar1_annual_ens_kwh: f64,
    pub worst_annual_ens_kwh: f64,
    pub avg_saifi: f64,
    pub cvar5_saifi: f64,
    pub avg_saidi_h: f64,
    pub cvar5_saidi_h: f64,
    /// Mean bus-hours spent islanded per year (statistical checks key on
    /// this directly).
    pub avg_annual_islanded_bus_hours: f64,
    /// One CVaR(1%) of hourly ENS per year (distribution panel data).
    pub per_year_cvar1_hourly_ens_kwh: Vec<f64>,
    /// Histogram of hourly ENS across all simulated hours.
    pub hourly_ens_histogram: Histogram,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Histogram {
    /// Bin edges, length = counts.len() + 1; first bin is exactly zero.
    pub edges_kwh: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    fn new(max_kwh: f64, bins: usize) -> Self {
        let mut edges = vec![0.0, 1e-12];
        for b in 1..=bins {
            edges.push(1e-12 + (max_kwh - 1e-12) * b as f64 / bins as f64);
        }
        Histogram {
            edges_kwh: edges,
            counts: vec![0; bins + 1],
        }
    }

    fn add(&mut self, value: f64) {
        let k = self
            .edges_kwh
            .windows(2)
            .position(|w| value >= w[0] && value < w[1])
            .unwrap_or(self.counts.len() - 1);
        self.counts[k] += 1;
    }

    fn merge(&mut self, other: &Histogram) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }
}

/// Hour-by-hour record of one simulated year, for inspection and tests.
#[derive(Debug, Clone)]
pub struct AnnualTrace {
    /// Failed line indices per hour (only hours with failures appear).
    pub failures_by_hour: BTreeMap<usize, Vec<usize>>,
    pub shed_kwh_by_hour: BTreeMap<usize, f64>,
    pub customers_interrupted_by_hour: BTreeMap<usize, u64>,
    pub ens_kwh: f64,
    pub saifi: f64,
    pub saidi_h: f64,
    pub islanded_bus_hours: u64,
}

struct YearAccumulator {
    ens_kwh: f64,
    interruptions_customer: f64,
    customer_hours: f64,
    islanded_bus_hours: u64,
    hourly_ens: Vec<f64>,
}

/// A deterministic calendar assigning a typical day to each of the 365
/// days, by largest-remainder apportionment of the day weights.
pub(crate) fn day_calendar(topology: &NetworkTopology) -> Vec<usize> {
    let mut counts: Vec<usize> = topology
        .typical_days
        .iter()
        .map(|d| d.weight_days_per_year.floor() as usize)
        .collect();
    let mut assigned: usize = counts.iter().sum();
    let mut fracs: Vec<(f64, usize)> = topology
        .typical_days
        .iter()
        .enumerate()
        .map(|(i, d)| (d.weight_days_per_year.fract(), i))
        .collect();
    fracs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    let mut k = 0;
    while assigned < 365 {
        counts[fracs[k % fracs.len()].1] += 1;
        assigned += 1;
        k += 1;
    }
    while assigned > 365 {
        let i = fracs[fracs.len() - 1 - (k % fracs.len())].1;
        if counts[i] > 0 {
            counts[i] -= 1;
            assigned -= 1;
        }
        k += 1;
    }
    let mut cal = Vec::with_capacity(365);
    for (d, &c) in counts.iter().enumerate() {
        cal.extend(std::iter::repeat(d).take(c));
    }
    cal
}

fn substream(seed: u64, year: u64, line: u64) -> ChaCha8Rng {
    // splitmix-style mixing into a per-(year, line) stream
    let mut z = seed
        .wrapping_add(0x9e3779b97f4a7c15u64.wrapping_mul(year + 1))
        .wrapping_add(0xbf58476d1ce4e5b9u64.wrapping_mul(line + 1));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    ChaCha8Rng::seed_from_u64(z ^ (z >> 31))
}

/// Draw the failed hours of one line for one year. With hourly
/// independence this is a geometric skip walk, so cost scales with the
/// number of failures rather than with 8760.
fn draw_failure_hours(p: f64, rng: &mut ChaCha8Rng, repair_hours: Option<f64>) -> Vec<usize> {
    let mut out = Vec::new();
    if p <= 0.0 {
        return out;
    }
    if p >= 1.0 {
        return (0..HOURS_PER_YEAR).collect();
    }
    let log_q = (1.0 - p).ln();
    let mut h: f64 = 0.0;
    loop {
        let u: f64 = rng.gen_range(0.0..1.0f64);
        let skip = ((1.0 - u).ln() / log_q).floor();
        h += skip;
        let start = h as usize;
        if start >= HOURS_PER_YEAR {
            break;
        }
        let reps = repair_hours.map_or(1, |r| r.round().max(1.0) as usize);
        for k in 0..reps {
            if start + k < HOURS_PER_YEAR {
                out.push(start + k);
            }
        }
        h = (start + reps) as f64;
    }
    out
}

fn simulate_year(
    topology: &NetworkTopology,
    plan: &InvestmentPlan,
    hourly_p: &[f64],
    repair: &[Option<f64>],
    calendar: &[usize],
    built: &[usize],
    profiles: &SocProfile,
    seed: u64,
    year: u64,
    histogram: &mut Histogram,
    trace: Option<&mut AnnualTrace>,
) -> YearAccumulator {
    let n_nodes = topology.nodes.len();
    let periods = topology.periods();
    let delta = topology.delta_hours();
    let total_customers: u64 = topology.nodes.iter().map(|n| n.customers).sum();

    // Collect failure hours per line, then pivot into per-hour events.
    let mut by_hour: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for li in topology.existing_lines() {
        if hourly_p[li] <= 0.0 {
            continue;
        }
        let mut rng = substream(seed, year, li as u64);
        for h in draw_failure_hours(hourly_p[li], &mut rng, repair[li]) {
            by_hour.entry(h).or_default().push(li);
        }
    }

    let mut acc = YearAccumulator {
        ens_kwh: 0.0,
        interruptions_customer: 0.0,
        customer_hours: 0.0,
        islanded_bus_hours: 0,
        hourly_ens: vec![0.0; HOURS_PER_YEAR],
    };
    let mut was_islanded = vec![false; n_nodes];
    let mut prev_hour_with_failures: Option<usize> = None;
    // Remaining storage credit per device while its bus stays islanded.
    let mut credit: Vec<Option<f64>> = vec![None; topology.storage.len()];
    let mut trace = trace;

    for (&hour, failed) in &by_hour {
        // A gap of energized hours ends every running interruption block.
        if prev_hour_with_failures != Some(hour.saturating_sub(1)) || hour == 0 {
            was_islanded.fill(false);
            credit.fill(None);
        }
        let day_of_year = hour / 24;
        let d = calendar[day_of_year.min(364)];
        let t = ((hour % 24) as f64 / delta) as usize;
        let t = t.min(periods - 1);

        let (_, islands) = energized_components(topology, failed, built);
        let mut islanded_now = vec![false; n_nodes];
        let mut shed_hour = 0.0;
        let mut interrupted_customers: u64 = 0;
        for island in &islands {
            let mut need = 0.0;
            for &ni in &island.buses {
                islanded_now[ni] = true;
                acc.islanded_bus_hours += 1;
                need += topology.demand_by_index(ni, t, d);
                interrupted_customers += topology.nodes[ni].customers;
                if !was_islanded[ni] {
                    acc.interruptions_customer += topology.nodes[ni].customers as f64;
                }
                acc.customer_hours += topology.nodes[ni].customers as f64;
            }
            let mut need_kwh = need * 1.0; // one-hour step
            for &hi in &island.storage {
                let c = credit[hi].get_or_insert_with(|| {
                    plan.energy_kwh(topology, hi) * profiles.get(hi, t, d)
                });
                let draw = need_kwh.min(*c);
                *c -= draw;
                need_kwh -= draw;
            }
            shed_hour += need_kwh;
        }
        // Devices whose bus got re-energized recover their daily schedule.
        for (hi, h) in topology.storage.iter().enumerate() {
            let ni = topology.node_index(&h.node).unwrap();
            if !islanded_now[ni] {
                credit[hi] = None;
            }
        }
        acc.ens_kwh += shed_hour;
        acc.hourly_ens[hour] = shed_hour;
        histogram.add(shed_hour);
        if let Some(tr) = trace.as_deref_mut() {
            tr.failures_by_hour.insert(hour, failed.clone());
            tr.shed_kwh_by_hour.insert(hour, shed_hour);
            tr.customers_interrupted_by_hour
                .insert(hour, interrupted_customers);
        }
        was_islanded = islanded_now;
        prev_hour_with_failures = Some(hour);
    }
    // Hours without failures contribute zero ENS but still count in the
    // histogram.
    let quiet_hours = HOURS_PER_YEAR - by_hour.len();
    histogram.counts[0] += quiet_hours as u64;

    if total_customers > 0 {
        acc.interruptions_customer /= total_customers as f64;
        acc.customer_hours /= total_customers as f64;
    }
    if let Some(tr) = trace {
        tr.ens_kwh = acc.ens_kwh;
        tr.saifi = acc.interruptions_customer;
        tr.saidi_h = acc.customer_hours;
        tr.islanded_bus_hours = acc.islanded_bus_hours;
    }
    acc
}

/// Produce the hour-by-hour trace of a single year (inspection/tests).
pub fn annual_trace(
    topology: &NetworkTopology,
    plan: &InvestmentPlan,
    rates: &[OutageRate],
    profiles: &SocProfile,
    seed: u64,
    year: u64,
) -> Result<AnnualTrace> {
    let (hourly_p, repair) = rate_tables(topology, rates, &McOptions::default())?;
    let calendar = day_calendar(topology);
    let built: Vec<usize> = plan.built_line_indices(topology).into_iter().collect();
    plan.validate(topology)?;
    let mut hist = Histogram::new(1.0, 1);
    let mut trace = AnnualTrace {
        failures_by_hour: BTreeMap::new(),
        shed_kwh_by_hour: BTreeMap::new(),
        customers_interrupted_by_hour: BTreeMap::new(),
        ens_kwh: 0.0,
        saifi: 0.0,
        saidi_h: 0.0,
        islanded_bus_hours: 0,
    };
    simulate_year(
        topology,
        plan,
        &hourly_p,
        &repair,
        &calendar,
        &built,
        profiles,
        seed,
        year,
        &mut hist,
        Some(&mut trace),
    );
    Ok(trace)
}

fn rate_tables(
    topology: &NetworkTopology,
    rates: &[OutageRate],
    options: &McOptions,
) -> Result<(Vec<f64>, Vec<Option<f64>>)> {
    let mut hourly_p = vec![0.0; topology.lines.len()];
    let mut repair = vec![None; topology.lines.len()];
    for r in rates {
        let li = topology.line_index(&r.line_id).ok_or_else(|| {
            Error::Validation(vec![format!("outage rate for unknown line {}", r.line_id)])
        })?;
        if r.rate_per_year < 0.0 {
            return Err(Error::Validation(vec![format!(
                "negative outage rate for line {}",
                r.line_id
            )]));
        }
        hourly_p[li] = r.rate_per_year / HOURS_PER_YEAR as f64;
        if let Some(m) = &options.mean_repair_hours {
            repair[li] = m.get(&r.line_id).copied();
        }
    }
    Ok((hourly_p, repair))
}

/// Run the Monte Carlo study. Identical inputs and seed reproduce the
/// report byte for byte.
pub fn run_monte_carlo(
    topology: &NetworkTopology,
    plan: &InvestmentPlan,
    rates: &[OutageRate],
    profiles: &SocProfile,
    years: usize,
    seed: u64,
    options: &McOptions,
) -> Result<MetricReport> {
    if years == 0 {
        return Err(Error::Validation(vec!["years must be at least 1".into()]));
    }
    plan.validate(topology)?;
    let (hourly_p, repair) = rate_tables(topology, rates, options)?;
    let calendar = day_calendar(topology);
    let built: Vec<usize> = plan.built_line_indices(topology).into_iter().collect();

    let max_hourly = topology
        .nodes
        .iter()
        .map(|n| n.peak_demand_kw)
        .sum::<f64>()
        .max(1.0);

    let results: Vec<(YearAccumulator, Histogram, f64)> = (0..years)
        .into_par_iter()
        .map(|year| {
            let mut hist = Histogram::new(max_hourly, 40);
            let mut acc = simulate_year(
                topology,
                plan,
                &hourly_p,
                &repair,
                &calendar,
                &built,
                profiles,
                seed,
                year as u64,
                &mut hist,
                None,
            );
            // Hourly ENS is sparse: fold the zero hours into one atom
            // instead of sorting 8760 values.
            let nonzero: Vec<(f64, f64)> = acc
                .hourly_ens
                .iter()
                .filter(|&&v| v > 0.0)
                .map(|&v| (v, 1.0 / HOURS_PER_YEAR as f64))
                .collect();
            let zero_mass = 1.0 - nonzero.len() as f64 / HOURS_PER_YEAR as f64;
            let mut dist = nonzero;
            dist.push((0.0, zero_mass));
            let cvar1_hourly = crate::sim::cvar(&dist, 0.99).expect("hourly cvar");
            acc.hourly_ens = Vec::new();
            (acc, hist, cvar1_hourly)
        })
        .collect();

    let mut histogram = Histogram::new(max_hourly, 40);
    let mut ens = Vec::with_capacity(years);
    let mut saifi = Vec::with_capacity(years);
    let mut saidi = Vec::with_capacity(years);
    let mut islanded_hours = Vec::with_capacity(years);
    let mut per_year_cvar1 = Vec::with_capacity(years);
    for (acc, hist, cv) in &results {
        histogram.merge(hist);
        ens.push(acc.ens_kwh);
        saifi.push(acc.interruptions_customer);
        saidi.push(acc.customer_hours);
        islanded_hours.push(acc.islanded_bus_hours as f64);
        per_year_cvar1.push(*cv);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let worst = |v: &[f64]| v.iter().fold(0.0f64, |a, &b| a.max(b));
    Ok(MetricReport {
        years,
        seed,
        avg_annual_ens_kwh: mean(&ens),
        cvar1_annual_ens_kwh: cvar_equal(&ens, 0.99)?,
        worst_annual_ens_kwh: worst(&ens),
        avg_saifi: mean(&saifi),
        cvar5_saifi: cvar_equal(&saifi, 0.95)?,
        avg_saidi_h: mean(&saidi),
        cvar5_saidi_h: cvar_equal(&saidi, 0.95)?,
        avg_annual_islanded_bus_hours: mean(&islanded_hours),
        per_year_cvar1_hourly_ens_kwh: per_year_cvar1,
        hourly_ens_histogram: histogram,
    })
}
