//! Run orchestration for the command-line front end: configuration,
//! sweep execution, table/CSV emission, and the reproducibility manifest.
//!
//! Every run writes a `manifest.json` with content hashes of the
//! configuration and of each input file plus tool and solver identifiers;
//! re-running the same configuration and seed reproduces every
//! non-timing artifact byte for byte (wall-clock measurements go to a
//! separate `timing.csv`, which is exempt from that guarantee).

use crate::error::{Error, Result};
use crate::formulation::{build_full_model, build_scalable_model, decode_solution};
use crate::formulation::{FullInstance, PlanOutcome, ScalableInstance};
use crate::islanding::{build_catalog, IslandCatalog, DEFAULT_COMBINATION_CAP};
use crate::model::{load_network, NetworkFormat, NetworkTopology};
use crate::scenario::{load_extreme_events, load_outage_rates, ExtremeEvent, OutageRate, ScenarioSet};
use crate::sim::{extreme_event_replay, run_monte_carlo, InvestmentPlan, McOptions, MetricReport};
use crate::soc::{compute_profiles, SocProfile};
use crate::solver::{solve, SolveConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormulationId {
    Scalable,
    Full,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub network_dir: PathBuf,
    pub outage_rates_csv: PathBuf,
    #[serde(default)]
    pub extreme_events_json: Option<PathBuf>,
    /// Standalone arbitrage price table overriding the typical days'
    /// prices when computing storage profiles.
    #[serde(default)]
    pub prices_csv: Option<PathBuf>,
    /// Precomputed state-of-charge profiles; skips the arbitrage LPs.
    #[serde(default)]
    pub profiles_csv: Option<PathBuf>,
    pub formulation: FormulationId,
    pub lambdas: Vec<f64>,
    pub volls: Vec<f64>,
    /// Overrides the network's CVaR level when set.
    #[serde(default)]
    pub cvar_alpha: Option<f64>,
    #[serde(default)]
    pub solver: SolveConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_years")]
    pub years: usize,
    pub out_dir: PathBuf,
    #[serde(default)]
    pub dump_islands: bool,
    /// Write each cell's model as MPS plus a variable-map JSON.
    #[serde(default = "default_true")]
    pub export_models: bool,
    /// Additionally write each cell's model in LP format.
    #[serde(default)]
    pub export_lp: bool,
    #[serde(default = "default_cap")]
    pub combination_cap: usize,
    /// (day, start period) pinning each non-base scenario for the
    /// conventional formulation; defaults to day 0 at its peak period.
    #[serde(default)]
    pub full_starts: Option<Vec<(usize, usize)>>,
}

fn default_years() -> usize {
    1000
}

fn default_true() -> bool {
    true
}

fn default_cap() -> usize {
    DEFAULT_COMBINATION_CAP
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::schema(path.display().to_string(), e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        for &l in &self.lambdas {
            if !(0.0..=1.0).contains(&l) {
                bad.push(format!("lambda {l} outside [0,1]"));
            }
        }
        for &v in &self.volls {
            if v <= 0.0 {
                bad.push(format!("voll {v} must be positive"));
            }
        }
        if self.lambdas.is_empty() || self.volls.is_empty() {
            bad.push("at least one lambda and one voll are required".into());
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(bad))
        }
    }
}

/// Inputs loaded once per run.
pub struct RunInputs {
    pub topology: NetworkTopology,
    pub rates: Vec<OutageRate>,
    pub events: Vec<ExtremeEvent>,
    pub scenarios: ScenarioSet,
    pub catalog: IslandCatalog,
    pub profiles: SocProfile,
}

pub fn load_inputs(cfg: &RunConfig) -> Result<RunInputs> {
    let topology = load_network(&cfg.network_dir, NetworkFormat::CsvDir)?;
    let rates = load_outage_rates(&cfg.outage_rates_csv)?;
    let events = match &cfg.extreme_events_json {
        Some(p) => load_extreme_events(p)?,
        None => Vec::new(),
    };
    let scenarios = ScenarioSet::build_from_rates(&topology, &rates, &events)?;
    let catalog = build_catalog(&topology, &scenarios.states, cfg.combination_cap)?;
    let profiles = match (&cfg.profiles_csv, &cfg.prices_csv) {
        (Some(p), _) => SocProfile::load_csv(&topology, p)?,
        (None, Some(p)) => {
            let prices = crate::soc::load_prices_csv(&topology, p)?;
            let views: Vec<&[f64]> = prices.iter().map(|v| v.as_slice()).collect();
            crate::soc::compute_profiles_with_prices(&topology, &views)?
        }
        (None, None) => compute_profiles(&topology)?,
    };
    Ok(RunInputs {
        topology,
        rates,
        events,
        scenarios,
        catalog,
        profiles,
    })
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn hash_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(sha256_hex(&bytes))
}

/// Hashes of everything a run consumed, sufficient to reproduce it.
pub fn write_manifest(cfg: &RunConfig, out_dir: &Path) -> Result<()> {
    let mut inputs: BTreeMap<String, String> = BTreeMap::new();
    for name in ["nodes.csv", "lines.csv", "storage.csv", "typical_days.csv", "params.json"] {
        let p = cfg.network_dir.join(name);
        if p.exists() {
            inputs.insert(name.to_string(), hash_file(&p)?);
        }
    }
    inputs.insert(
        "outage_rates.csv".into(),
        hash_file(&cfg.outage_rates_csv)?,
    );
    if let Some(p) = &cfg.extreme_events_json {
        inputs.insert("extreme_events.json".into(), hash_file(p)?);
    }
    let manifest = serde_json::json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "config_sha256": sha256_hex(serde_json::to_string(cfg).unwrap().as_bytes()),
        "solver_engine": cfg.solver.effective_engine()?.id(),
        "seed": cfg.seed,
        "inputs_sha256": inputs,
    });
    let p = out_dir.join("manifest.json");
    std::fs::write(&p, serde_json::to_string_pretty(&manifest).unwrap())
        .map_err(|e| Error::io(p.display().to_string(), e))
}

fn cell_stem(voll: f64, lambda: f64) -> String {
    format!("plan_voll{voll}_lambda{lambda}")
}

/// Solve the (voll, lambda) sweep and write the investment table, one plan
/// file per cell, and the manifest. Returns the decoded outcomes in sweep
/// order.
pub fn cmd_plan(cfg: &RunConfig) -> Result<Vec<PlanOutcome>> {
    cfg.validate()?;
    let inputs = load_inputs(cfg)?;
    std::fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| Error::io(cfg.out_dir.display().to_string(), e))?;
    if cfg.dump_islands {
        let p = cfg.out_dir.join("islands.json");
        let dump = inputs.catalog.to_json(&inputs.topology);
        std::fs::write(&p, serde_json::to_string_pretty(&dump).unwrap())
            .map_err(|e| Error::io(p.display().to_string(), e))?;
    }

    let mut outcomes = Vec::new();
    let mut timing: Vec<(String, f64)> = Vec::new();
    for &voll in &cfg.volls {
        for &lambda in &cfg.lambdas {
            let started = std::time::Instant::now();
            let stem = cell_stem(voll, lambda);
            let model = match cfg.formulation {
                FormulationId::Scalable => {
                    let mut inst = ScalableInstance::new(
                        &inputs.topology,
                        &inputs.scenarios,
                        &inputs.catalog,
                        &inputs.profiles,
                    )?
                    .with_lambda(lambda)
                    .with_voll(voll);
                    if let Some(a) = cfg.cvar_alpha {
                        inst = inst.with_cvar_alpha(a);
                    }
                    build_scalable_model(&inst)?
                }
                FormulationId::Full => {
                    let starts = match &cfg.full_starts {
                        Some(s) => s.clone(),
                        None => {
                            let peak = peak_period(&inputs.topology, 0);
                            vec![(0, peak); inputs.scenarios.scenarios.len() - 1]
                        }
                    };
                    let mut inst = FullInstance::from_scenario_set(
                        &inputs.topology,
                        &inputs.scenarios,
                        &starts,
                    )?
                    .with_lambda(lambda)
                    .with_voll(voll);
                    if let Some(a) = cfg.cvar_alpha {
                        inst.cvar_alpha = a;
                    }
                    build_full_model(&inst)?
                }
            };
            if cfg.export_models {
                export_cell_model(cfg, &model, &stem)?;
            }
            let result = solve(&model, &cfg.solver)?;
            if !result.status.has_solution() {
                return Err(Error::Solver(format!(
                    "cell voll={voll} lambda={lambda}: solver returned {:?}",
                    result.status
                )));
            }
            // The decode path recomputes the cost breakdown through the
            // island catalog; both formulations share the investment
            // variable families.
            let mut sinst = ScalableInstance::new(
                &inputs.topology,
                &inputs.scenarios,
                &inputs.catalog,
                &inputs.profiles,
            )?
            .with_lambda(lambda)
            .with_voll(voll);
            if let Some(a) = cfg.cvar_alpha {
                sinst = sinst.with_cvar_alpha(a);
            }
            let outcome = decode_solution(&sinst, &result)?;
            let p = cfg.out_dir.join(format!("{stem}.json"));
            std::fs::write(&p, serde_json::to_string_pretty(&outcome).unwrap())
                .map_err(|e| Error::io(p.display().to_string(), e))?;
            timing.push((stem, started.elapsed().as_secs_f64()));
            outcomes.push(outcome);
        }
    }

    write_investment_table(&cfg.out_dir.join("table_investments.csv"), &outcomes)?;
    let p = cfg.out_dir.join("timing.csv");
    let mut w = csv::Writer::from_path(&p)
        .map_err(|e| Error::schema(p.display().to_string(), e.to_string()))?;
    w.write_record(["cell", "wall_time_s"])
        .map_err(|e| Error::schema(p.display().to_string(), e.to_string()))?;
    for (cell, secs) in &timing {
        w.write_record([cell.as_str(), &format!("{secs:.3}")])
            .map_err(|e| Error::schema(p.display().to_string(), e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(p.display().to_string(), e))?;
    write_manifest(cfg, &cfg.out_dir)?;
    Ok(outcomes)
}

/// Write a cell's model as MPS plus the variable map used to decode its
/// solutions (structured name, kind, bounds per column, in column order).
fn export_cell_model(
    cfg: &RunConfig,
    model: &crate::milp::MilpModel,
    stem: &str,
) -> Result<()> {
    let mps_path = cfg.out_dir.join(format!("model_{stem}.mps"));
    let doc = model.export_mps(&mps_path, crate::milp::MpsFormat::Free)?;
    let vars: Vec<serde_json::Value> = model
        .vars()
        .iter()
        .zip(&doc.var_names)
        .map(|(v, emitted)| {
            serde_json::json!({
                "name": v.name,
                "column": emitted,
                "binary": v.kind == crate::milp::VarKind::Binary,
                "lower": v.lower,
                "upper": v.upper,
            })
        })
        .collect();
    let map = serde_json::json!({
        "formulation": model.formulation,
        "objective_row": doc.objective_row,
        "variables": vars,
    });
    let p = cfg.out_dir.join(format!("varmap_{stem}.json"));
    std::fs::write(&p, serde_json::to_string_pretty(&map).unwrap())
        .map_err(|e| Error::io(p.display().to_string(), e))?;
    if cfg.export_lp {
        let p = cfg.out_dir.join(format!("model_{stem}.lp"));
        std::fs::write(&p, model.to_lp()).map_err(|e| Error::io(p.display().to_string(), e))?;
    }
    Ok(())
}

fn peak_period(topo: &NetworkTopology, day: usize) -> usize {
    topo.typical_days[day]
        .load_factor
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(t, _)| t)
        .unwrap_or(0)
}

/// One row per sweep cell; the investment-results table.
pub fn write_investment_table(path: &Path, outcomes: &[PlanOutcome]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| Error::schema(path.display().to_string(), e.to_string()))?;
    w.write_record([
        "voll_usd_per_kwh",
        "lambda",
        "expected_loss_cost_usd_per_year",
        "cvar_loss_cost_usd_per_year",
        "line_investment_usd",
        "storage_investment_usd",
        "lines_built",
        "installed_storage_kwh",
        "status",
    ])
    .map_err(|e| Error::schema(path.display().to_string(), e.to_string()))?;
    for o in outcomes {
        w.write_record([
            format!("{}", o.voll_usd_per_kwh),
            format!("{}", o.lambda),
            format!("{}", o.expected_loss_cost_usd_per_year),
            format!("{}", o.cvar_loss_cost_usd_per_year),
            format!("{}", o.line_investment_usd),
            format!("{}", o.storage_investment_usd),
            format!("{}", o.lines_built),
            format!("{}", o.storage_kwh_total),
            format!("{:?}", o.status).to_lowercase(),
        ])
        .map_err(|e| Error::schema(path.display().to_string(), e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path.display().to_string(), e))
}

/// Monte Carlo every stored plan plus the no-investment baseline; writes
/// the energy-not-served and SAIFI/SAIDI tables and per-plan histograms.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<Vec<(String, MetricReport)>> {
    cfg.validate()?;
    let inputs = load_inputs(cfg)?;
    std::fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| Error::io(cfg.out_dir.display().to_string(), e))?;

    let mut plans: Vec<(String, InvestmentPlan)> =
        vec![("no-investment".to_string(), InvestmentPlan::none())];
    for &voll in &cfg.volls {
        for &lambda in &cfg.lambdas {
            let stem = cell_stem(voll, lambda);
            let p = cfg.out_dir.join(format!("{stem}.json"));
            let text = std::fs::read_to_string(&p)
                .map_err(|e| Error::io(p.display().to_string(), e))?;
            let outcome: PlanOutcome = serde_json::from_str(&text)
                .map_err(|e| Error::schema(p.display().to_string(), e.to_string()))?;
            plans.push((stem, outcome.plan));
        }
    }

    let mut reports = Vec::new();
    for (name, plan) in plans {
        let report = run_monte_carlo(
            &inputs.topology,
            &plan,
            &inputs.rates,
            &inputs.profiles,
            cfg.years,
            cfg.seed,
            &McOptions::default(),
        )?;
        let p = cfg.out_dir.join(format!("metrics_{name}.json"));
        std::fs::write(&p, serde_json::to_string_pretty(&report).unwrap())
            .map_err(|e| Error::io(p.display().to_string(), e))?;
        reports.push((name, report));
    }
    write_metric_tables(&cfg.out_dir, &reports)?;
    write_manifest(cfg, &cfg.out_dir)?;
    Ok(reports)
}

pub fn write_metric_tables(out_dir: &Path, reports: &[(String, MetricReport)]) -> Result<()> {
    let p = out_dir.join("table_energy_not_served.csv");
    let mut w = csv::Writer::from_path(&p)
        .map_err(|e| Error::schema(p.display().to_string(), e.to_string()))?;
    w.write_record([
        "plan",
        "avg_annual_ens_kwh",
        "cvar1_annual_ens_kwh",
        "worst_annual_ens_kwh",
    ])
    .map_err(|e| Error::schema(p.display().to_string(), e.to_string()))?;
    for (name, r) in reports {
        w.write_record([
            name.clone(),
            format!("{}", r.avg_annual_ens_kwh),
            format!("{}", r.cvar1_annual_ens_kwh),
            format!("{}", r.worst_annual_ens_kwh),
        ])
        .map_err(|e| Error::schema(p.display().to_string(), e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(p.display().to_string(), e))?;

    let p = out_dir.join("table_saifi_saidi.csv");
    let mut w = csv::Writer::from_path(&p)
        .map_err(|e| Error::schema(p.display().to_string(), e.to_string()))?;
    w.write_record([
        "plan",
        "avg_saifi",
        "cvar5_saifi",
        "avg_saidi_h",
        "cvar5_saidi_h",
    ])
    .map_err(|e| Error::schema(p.display().to_string(), e.to_string()))?;
    for (name, r) in reports {
        w.write_record([
            name.clone(),
            format!("{}", r.avg_saifi),
            format!("{}", r.cvar5_saifi),
            format!("{}", r.avg_saidi_h),
            format!("{}", r.cvar5_saidi_h),
        ])
        .map_err(|e| Error::schema(p.display().to_string(), e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(p.display().to_string(), e))?;

    for (name, r) in reports {
        let p = out_dir.join(format!("histogram_{name}.csv"));
        let mut w = csv::Writer::from_path(&p)
            .map_err(|e| Error::schema(p.display().to_string(), e.to_string()))?;
        w.write_record(["bin_lower_kwh", "bin_upper_kwh", "hours"])
            .map_err(|e| Error::schema(p.display().to_string(), e.to_string()))?;
        let h = &r.hourly_ens_histogram;
        for (k, &count) in h.counts.iter().enumerate() {
            w.write_record([
                format!("{}", h.edges_kwh[k]),
                format!("{}", h.edges_kwh[k + 1]),
                format!("{count}"),
            ])
            .map_err(|e| Error::schema(p.display().to_string(), e.to_string()))?;
        }
        w.flush().map_err(|e| Error::io(p.display().to_string(), e))?;
    }
    Ok(())
}

/// Replay one named extreme event against every stored plan.
pub fn cmd_replay(cfg: &RunConfig, event_name: &str, day: usize, start: usize) -> Result<()> {
    let inputs = load_inputs(cfg)?;
    let event = inputs
        .events
        .iter()
        .find(|e| e.name == event_name)
        .ok_or_else(|| Error::Validation(vec![format!("no extreme event named {event_name}")]))?;
    let duration = (event.duration_hours / inputs.topology.delta_hours()).ceil() as usize;
    let duration = duration.min(inputs.topology.periods());
    std::fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| Error::io(cfg.out_dir.display().to_string(), e))?;

    let mut plans: Vec<(String, InvestmentPlan)> =
        vec![("no-investment".to_string(), InvestmentPlan::none())];
    for &voll in &cfg.volls {
        for &lambda in &cfg.lambdas {
            let stem = cell_stem(voll, lambda);
            let p = cfg.out_dir.join(format!("{stem}.json"));
            if p.exists() {
                let text = std::fs::read_to_string(&p)
                    .map_err(|e| Error::io(p.display().to_string(), e))?;
                let outcome: PlanOutcome = serde_json::from_str(&text)
                    .map_err(|e| Error::schema(p.display().to_string(), e.to_string()))?;
                plans.push((stem, outcome.plan));
            }
        }
    }
    let p = cfg.out_dir.join(format!("replay_{event_name}.csv"));
    let mut w = csv::Writer::from_path(&p)
        .map_err(|e| Error::schema(p.display().to_string(), e.to_string()))?;
    w.write_record([
        "plan",
        "period",
        "demand_kwh",
        "served_kwh",
        "served_fraction",
    ])
    .map_err(|e| Error::schema(p.display().to_string(), e.to_string()))?;
    for (name, plan) in &plans {
        let r = extreme_event_replay(&inputs.topology, plan, &event.lines, day, start, duration)?;
        let frac = r.served_fraction();
        for t in 0..r.demand_kwh.len() {
            w.write_record([
                name.clone(),
                format!("{}", t + 1),
                format!("{}", r.demand_kwh[t]),
                format!("{}", r.served_kwh[t]),
                format!("{}", frac[t]),
            ])
            .map_err(|e| Error::schema(p.display().to_string(), e.to_string()))?;
        }
    }
    w.flush().map_err(|e| Error::io(p.display().to_string(), e))
}

/// Rebuild the summary tables from artifacts already in the output
/// directory (no solving, no simulation).
pub fn cmd_report(cfg: &RunConfig) -> Result<()> {
    let mut outcomes = Vec::new();
    for &voll in &cfg.volls {
        for &lambda in &cfg.lambdas {
            let p = cfg.out_dir.join(format!("{}.json", cell_stem(voll, lambda)));
            if p.exists() {
                let text = std::fs::read_to_string(&p)
                    .map_err(|e| Error::io(p.display().to_string(), e))?;
                outcomes.push(
                    serde_json::from_str(&text)
                        .map_err(|e| Error::schema(p.display().to_string(), e.to_string()))?,
                );
            }
        }
    }
    if !outcomes.is_empty() {
        write_investment_table(&cfg.out_dir.join("table_investments.csv"), &outcomes)?;
    }
    let mut reports = Vec::new();
    let mut names: Vec<String> = vec!["no-investment".to_string()];
    for &voll in &cfg.volls {
        for &lambda in &cfg.lambdas {
            names.push(cell_stem(voll, lambda));
        }
    }
    for name in names {
        let p = cfg.out_dir.join(format!("metrics_{name}.json"));
        if p.exists() {
            let text = std::fs::read_to_string(&p)
                .map_err(|e| Error::io(p.display().to_string(), e))?;
            let r: MetricReport = serde_json::from_str(&text)
                .map_err(|e| Error::schema(p.display().to_string(), e.to_string()))?;
            reports.push((name, r));
        }
    }
    if !reports.is_empty() {
        write_metric_tables(&cfg.out_dir, &reports)?;
    }
    Ok(())
}
