//! Network ingestion: a directory of CSVs plus one JSON for parameters, or
//! a single JSON file for the whole topology.
//!
//! CSV schemas (headers carry units):
//! - `nodes.csv`: id, is_substation, peak_demand_kw, customers, injection_limit_kw
//! - `lines.csv`: id, from_node, to_node, impedance_per_len, length_mi,
//!   capacity_kw, status, fixed_cost_usd
//! - `storage.csv`: id, node, status, p_in_max_kw, p_out_max_kw,
//!   round_trip_eff, hours_to_full, fixed_cost_usd, var_cost_usd_per_kwh, size_cap
//! - `typical_days.csv` (long format, one row per period): day_id,
//!   weight_days_per_year, hours_per_period, period, load_factor, price_usd_per_kwh
//! - `params.json`: [`EconomicParams`]

use super::{EconomicParams, Line, NetworkTopology, Node, StorageDevice, TypicalDay};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetworkFormat {
    CsvDir,
    Json,
}

#[derive(Debug, Serialize, Deserialize)]
struct DayRow {
    day_id: String,
    weight_days_per_year: f64,
    hours_per_period: f64,
    period: usize,
    load_factor: f64,
    price_usd_per_kwh: f64,
}

fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut rdr = csv::Reader::from_path(path)
        .map_err(|e| Error::schema(path.display().to_string(), e.to_string()))?;
    let mut out = Vec::new();
    for rec in rdr.deserialize() {
        out.push(rec.map_err(|e| Error::schema(path.display().to_string(), e.to_string()))?);
    }
    Ok(out)
}

fn assemble_days(path: &Path, rows: Vec<DayRow>) -> Result<Vec<TypicalDay>> {
    let mut days: Vec<TypicalDay> = Vec::new();
    let mut order: BTreeMap<String, usize> = BTreeMap::new();
    for row in rows {
        let idx = *order.entry(row.day_id.clone()).or_insert_with(|| {
            days.push(TypicalDay {
                id: row.day_id.clone(),
                weight_days_per_year: row.weight_days_per_year,
                hours_per_period: row.hours_per_period,
                load_factor: Vec::new(),
                price_usd_per_kwh: Vec::new(),
            });
            days.len() - 1
        });
        let day = &mut days[idx];
        if row.period != day.load_factor.len() + 1 {
            return Err(Error::schema(
                path.display().to_string(),
                format!(
                    "day {} periods must be contiguous starting at 1; saw period {}",
                    row.day_id, row.period
                ),
            ));
        }
        day.load_factor.push(row.load_factor);
        day.price_usd_per_kwh.push(row.price_usd_per_kwh);
    }
    Ok(days)
}

/// Load and validate a topology from a CSV directory or a JSON file.
pub fn load_network(path: &Path, format: NetworkFormat) -> Result<NetworkTopology> {
    match format {
        NetworkFormat::Json => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::io(path.display().to_string(), e))?;
            let mut topo: NetworkTopology = serde_json::from_str(&text)
                .map_err(|e| Error::schema(path.display().to_string(), e.to_string()))?;
            topo.validate()?;
            Ok(topo)
        }
        NetworkFormat::CsvDir => {
            let nodes: Vec<Node> = read_csv(&path.join("nodes.csv"))?;
            let lines: Vec<Line> = read_csv(&path.join("lines.csv"))?;
            let storage_path = path.join("storage.csv");
            let storage: Vec<StorageDevice> = if storage_path.exists() {
                read_csv(&storage_path)?
            } else {
                Vec::new()
            };
            let day_rows: Vec<DayRow> = read_csv(&path.join("typical_days.csv"))?;
            let days = assemble_days(&path.join("typical_days.csv"), day_rows)?;
            let params_path = path.join("params.json");
            let text = std::fs::read_to_string(&params_path)
                .map_err(|e| Error::io(params_path.display().to_string(), e))?;
            let economic: EconomicParams = serde_json::from_str(&text)
                .map_err(|e| Error::schema(params_path.display().to_string(), e.to_string()))?;
            NetworkTopology::new(nodes, lines, storage, days, economic)
        }
    }
}

/// Write a topology back out in either format. A CSV round trip
/// reproduces the topology field for field.
pub fn save_network(topo: &NetworkTopology, path: &Path, format: NetworkFormat) -> Result<()> {
    match format {
        NetworkFormat::Json => {
            let text = serde_json::to_string_pretty(topo)
                .map_err(|e| Error::schema(path.display().to_string(), e.to_string()))?;
            std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
        }
        NetworkFormat::CsvDir => {
            std::fs::create_dir_all(path).map_err(|e| Error::io(path.display().to_string(), e))?;
            let write_csv = |name: &str, write: &dyn Fn(&mut csv::Writer<std::fs::File>) -> csv::Result<()>| -> Result<()> {
                let p = path.join(name);
                let mut w = csv::Writer::from_path(&p)
                    .map_err(|e| Error::schema(p.display().to_string(), e.to_string()))?;
                write(&mut w).map_err(|e| Error::schema(p.display().to_string(), e.to_string()))?;
                w.flush().map_err(|e| Error::io(p.display().to_string(), e))
            };
            write_csv("nodes.csv", &|w| {
                for n in &topo.nodes {
                    w.serialize(n)?;
                }
                Ok(())
            })?;
            write_csv("lines.csv", &|w| {
                for l in &topo.lines {
                    w.serialize(l)?;
                }
                Ok(())
            })?;
            write_csv("storage.csv", &|w| {
                for s in &topo.storage {
                    w.serialize(s)?;
                }
                Ok(())
            })?;
            write_csv("typical_days.csv", &|w| {
                for d in &topo.typical_days {
                    for t in 0..d.periods() {
                        w.serialize(DayRow {
                            day_id: d.id.clone(),
                            weight_days_per_year: d.weight_days_per_year,
                            hours_per_period: d.hours_per_period,
                            period: t + 1,
                            load_factor: d.load_factor[t],
                            price_usd_per_kwh: d.price_usd_per_kwh[t],
                        })?;
                    }
                }
                Ok(())
            })?;
            let p = path.join("params.json");
            let text = serde_json::to_string_pretty(&topo.economic)
                .map_err(|e| Error::schema(p.display().to_string(), e.to_string()))?;
            std::fs::write(&p, text).map_err(|e| Error::io(p.display().to_string(), e))
        }
    }
}
