//! Normalized state-of-charge profiles.
//!
//! Storage follows a fixed daily charge/discharge pattern driven by energy
//! prices, not by outage anticipation. Per device and typical day we solve
//! a small arbitrage LP for a unit-capacity battery and freeze the
//! resulting state of charge as the fraction-of-capacity profile
//! `f(h,t,d)`. The profile value at period `t` is the state of charge at
//! the end of `t`; the value at the last period doubles as the start-of-day
//! level (daily periodicity).

use crate::error::{Error, Result};
use crate::model::NetworkTopology;
use microlp::{ComparisonOp, OptimizationDirection, Problem};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Fraction-of-capacity state of charge per (storage, period, day).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SocProfile {
    n_storage: usize,
    n_days: usize,
    periods: usize,
    /// Flattened `[h][d][t]`.
    values: Vec<f64>,
}

impl SocProfile {
    fn empty(topology: &NetworkTopology) -> Self {
        SocProfile {
            n_storage: topology.storage.len(),
            n_days: topology.typical_days.len(),
            periods: topology.periods(),
            values: vec![0.0; topology.storage.len()
                * topology.typical_days.len()
                * topology.periods()],
        }
    }

    fn offset(&self, h: usize, t: usize, d: usize) -> usize {
        (h * self.n_days + d) * self.periods + t
    }

    /// State of charge fraction at the end of period `t` of day `d`.
    pub fn get(&self, h: usize, t: usize, d: usize) -> f64 {
        self.values[self.offset(h, t, d)]
    }

    /// Start-of-day fraction (equals the last period's value).
    pub fn start_of_day(&self, h: usize, d: usize) -> f64 {
        self.get(h, self.periods - 1, d)
    }

    /// Constant profile; `1.0` and `0.0` are useful limiting cases.
    pub fn uniform(topology: &NetworkTopology, value: f64) -> Result<Self> {
        Self::from_fn(topology, |_, _, _| value)
    }

    /// Explicit table, bypassing optimization. Values outside [0,1] are
    /// rejected.
    pub fn from_fn(
        topology: &NetworkTopology,
        f: impl Fn(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut p = Self::empty(topology);
        for h in 0..p.n_storage {
            for d in 0..p.n_days {
                for t in 0..p.periods {
                    let v = f(h, t, d);
                    if !(0.0..=1.0).contains(&v) {
                        return Err(Error::Validation(vec![format!(
                            "state-of-charge fraction {v} out of [0,1] for storage {}, day {}, period {}",
                            topology.storage[h].id,
                            topology.typical_days[d].id,
                            t + 1
                        )]));
                    }
                    let o = p.offset(h, t, d);
                    p.values[o] = v;
                }
            }
        }
        Ok(p)
    }

    pub fn save_csv(&self, topology: &NetworkTopology, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)
            .map_err(|e| Error::schema(path.display().to_string(), e.to_string()))?;
        w.write_record(["storage_id", "day_id", "period", "soc_fraction"])
            .map_err(|e| Error::schema(path.display().to_string(), e.to_string()))?;
        for h in 0..self.n_storage {
            for d in 0..self.n_days {
                for t in 0..self.periods {
                    w.write_record([
                        topology.storage[h].id.as_str(),
                        topology.typical_days[d].id.as_str(),
                        &(t + 1).to_string(),
                        &format!("{}", self.get(h, t, d)),
                    ])
                    .map_err(|e| Error::schema(path.display().to_string(), e.to_string()))?;
                }
            }
        }
        w.flush()
            .map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn load_csv(topology: &NetworkTopology, path: &Path) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            storage_id: String,
            day_id: String,
            period: usize,
            soc_fraction: f64,
        }
        let mut rdr = csv::Reader::from_path(path)
            .map_err(|e| Error::schema(path.display().to_string(), e.to_string()))?;
        let mut p = Self::empty(topology);
        let mut seen = vec![false; p.values.len()];
        for rec in rdr.deserialize::<Row>() {
            let row = rec.map_err(|e| Error::schema(path.display().to_string(), e.to_string()))?;
            let h = topology.storage_index(&row.storage_id).ok_or_else(|| {
                Error::schema(
                    path.display().to_string(),
                    format!("unknown storage {}", row.storage_id),
                )
            })?;
            let d = topology
                .typical_days
                .iter()
                .position(|day| day.id == row.day_id)
                .ok_or_else(|| {
                    Error::schema(
                        path.display().to_string(),
                        format!("unknown day {}", row.day_id),
                    )
                })?;
            if row.period < 1 || row.period > p.periods {
                return Err(Error::schema(
                    path.display().to_string(),
                    format!("period {} out of range", row.period),
                ));
            }
            if !(0.0..=1.0).contains(&row.soc_fraction) {
                return Err(Error::schema(
                    path.display().to_string(),
                    format!("soc fraction {} out of [0,1]", row.soc_fraction),
                ));
            }
            let o = p.offset(h, row.period - 1, d);
            p.values[o] = row.soc_fraction;
            seen[o] = true;
        }
        if seen.iter().any(|&s| !s) {
            return Err(Error::schema(
                path.display().to_string(),
                "profile table is missing entries".to_string(),
            ));
        }
        Ok(p)
    }
}

/// Load a standalone price table (day_id, period, usd_per_kwh) to use in
/// place of the typical days' own prices.
pub fn load_prices_csv(topology: &NetworkTopology, path: &Path) -> Result<Vec<Vec<f64>>> {
    #[derive(Deserialize)]
    struct Row {
        day_id: String,
        period: usize,
        usd_per_kwh: f64,
    }
    let mut rdr = csv::Reader::from_path(path)
        .map_err(|e| Error::schema(path.display().to_string(), e.to_string()))?;
    let periods = topology.periods();
    let mut prices = vec![vec![f64::NAN; periods]; topology.typical_days.len()];
    for rec in rdr.deserialize::<Row>() {
        let row = rec.map_err(|e| Error::schema(path.display().to_string(), e.to_string()))?;
        let d = topology
            .typical_days
            .iter()
            .position(|day| day.id == row.day_id)
            .ok_or_else(|| {
                Error::schema(
                    path.display().to_string(),
                    format!("unknown day {}", row.day_id),
                )
            })?;
        if row.period < 1 || row.period > periods {
            return Err(Error::schema(
                path.display().to_string(),
                format!("period {} out of range", row.period),
            ));
        }
        prices[d][row.period - 1] = row.usd_per_kwh;
    }
    if prices.iter().flatten().any(|p| p.is_nan()) {
        return Err(Error::schema(
            path.display().to_string(),
            "price table is missing entries".to_string(),
        ));
    }
    Ok(prices)
}

/// Per-day price curve override; defaults to the typical days' own prices.
pub fn compute_profiles(topology: &NetworkTopology) -> Result<SocProfile> {
    let prices: Vec<&[f64]> = topology
        .typical_days
        .iter()
        .map(|d| d.price_usd_per_kwh.as_slice())
        .collect();
    compute_profiles_with_prices(topology, &prices)
}

/// Solve the unit-capacity arbitrage LP per (device, day) and assemble the
/// profile. Revenue is maximized first; among revenue-optimal schedules the
/// total charge/discharge throughput is minimized as a tie-break.
pub fn compute_profiles_with_prices(
    topology: &NetworkTopology,
    prices: &[&[f64]],
) -> Result<SocProfile> {
    let periods = topology.periods();
    if prices.len() != topology.typical_days.len() {
        return Err(Error::Validation(vec![format!(
            "expected {} price curves, got {}",
            topology.typical_days.len(),
            prices.len()
        )]));
    }
    for (d, p) in prices.iter().enumerate() {
        if p.len() != periods {
            return Err(Error::Validation(vec![format!(
                "price curve for day {} has {} periods, expected {periods}",
                topology.typical_days[d].id,
                p.len()
            )]));
        }
    }
    let delta = topology.delta_hours();
    let mut profile = SocProfile::empty(topology);
    for (h, dev) in topology.storage.iter().enumerate() {
        // Per-period step limits as fractions of unit energy capacity.
        let charge_step = dev.round_trip_eff * delta / dev.hours_to_full;
        let discharge_step =
            dev.p_out_max_kw * delta / (dev.hours_to_full * dev.p_in_max_kw);
        for d in 0..topology.typical_days.len() {
            let soc = arbitrage_day(
                prices[d],
                dev.round_trip_eff,
                charge_step,
                discharge_step,
            )?;
            for (t, &v) in soc.iter().enumerate() {
                let o = profile.offset(h, t, d);
                // Guard against simplex round-off leaking outside [0,1].
                profile.values[o] = v.clamp(0.0, 1.0);
            }
        }
    }
    Ok(profile)
}

/// One day's LP. Variables per period: state of charge at period end, plus
/// charge and discharge steps in state-of-charge fraction units. The
/// start-of-day level is identified with the last period's level, which
/// bakes in periodicity. Returns end-of-period fractions.
fn arbitrage_day(
    prices: &[f64],
    eff: f64,
    charge_step: f64,
    discharge_step: f64,
) -> Result<Vec<f64>> {
    let t_count = prices.len();
    let solve = |min_throughput: Option<f64>| -> Result<(f64, Vec<f64>)> {
        // Phase 1: maximize revenue. Phase 2: fix revenue, minimize
        // throughput (pass the phase-1 revenue in `min_throughput`).
        let phase2 = min_throughput.is_some();
        let mut p = Problem::new(OptimizationDirection::Minimize);
        let soc: Vec<_> = (0..t_count).map(|_| p.add_var(0.0, (0.0, 1.0))).collect();
        let mut charge = Vec::with_capacity(t_count);
        let mut discharge = Vec::with_capacity(t_count);
        for t in 0..t_count {
            // Revenue per unit step: discharging earns price/1, charging
            // costs price/eff (the step is measured after losses).
            let (c_cost, d_cost) = if phase2 {
                (1.0, 1.0)
            } else {
                (prices[t] / eff, -prices[t])
            };
            charge.push(p.add_var(c_cost, (0.0, charge_step)));
            discharge.push(p.add_var(d_cost, (0.0, discharge_step)));
        }
        for t in 0..t_count {
            let prev = if t == 0 { soc[t_count - 1] } else { soc[t - 1] };
            p.add_constraint(
                [
                    (soc[t], 1.0),
                    (prev, -1.0),
                    (charge[t], -1.0),
                    (discharge[t], 1.0),
                ],
                ComparisonOp::Eq,
                0.0,
            );
        }
        if let Some(revenue) = min_throughput {
            let mut terms = Vec::with_capacity(2 * t_count);
            for t in 0..t_count {
                terms.push((discharge[t], prices[t]));
                terms.push((charge[t], -prices[t] / eff));
            }
            p.add_constraint(terms, ComparisonOp::Ge, revenue - 1e-9);
        }
        let sol = p
            .solve()
            .map_err(|e| Error::Solver(format!("storage profile LP failed: {e}")))?
            .into_solution()
            .map_err(|e| Error::Solver(format!("storage profile LP interrupted: {e:?}")))?;
        let values: Vec<f64> = soc.iter().map(|&v| sol.var_value(v)).collect();
        let revenue: f64 = (0..t_count)
            .map(|t| {
                prices[t] * sol.var_value(discharge[t])
                    - prices[t] / eff * sol.var_value(charge[t])
            })
            .sum();
        Ok((revenue, values))
    };
    let (best_revenue, _) = solve(None)?;
    let (_, soc) = solve(Some(best_revenue))?;
    Ok(soc)
}
