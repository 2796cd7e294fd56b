use clap::{Parser, Subcommand};
use gridplan::report::{cmd_plan, cmd_replay, cmd_report, cmd_simulate, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

/// Risk-averse distribution grid expansion planning.
#[derive(Parser)]
#[command(name = "gridplan", version, about)]
struct Cli {
    /// Run configuration (JSON).
    #[arg(long, global = true, default_value = "run.json")]
    config: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the (VoLL, lambda) sweep and write plans plus the
    /// investment table.
    Plan {
        /// Override the network directory from the config.
        #[arg(long)]
        network: Option<PathBuf>,
        /// Override the formulation: "scalable" or "full".
        #[arg(long)]
        formulation: Option<String>,
        /// Restrict the sweep to one lambda.
        #[arg(long)]
        lambda: Option<f64>,
        /// Restrict the sweep to one VoLL ($/kWh).
        #[arg(long)]
        voll: Option<f64>,
        /// Also dump the island catalog to islands.json.
        #[arg(long)]
        dump_islands: bool,
    },
    /// Monte Carlo the stored plans out of sample and write the metric
    /// tables.
    Simulate,
    /// Replay a named extreme event against the stored plans.
    Replay {
        /// Event name from extreme_events.json.
        #[arg(long)]
        event: String,
        /// Typical-day index to replay within.
        #[arg(long, default_value_t = 0)]
        day: usize,
        /// Start period (1-based).
        #[arg(long, default_value_t = 1)]
        start: usize,
    },
    /// Rebuild summary tables from stored artifacts.
    Report,
}

fn run(cli: Cli) -> gridplan::Result<()> {
    let mut cfg = RunConfig::load(&cli.config)?;
    match cli.command {
        Command::Plan {
            network,
            formulation,
            lambda,
            voll,
            dump_islands,
        } => {
            if let Some(dir) = network {
                cfg.network_dir = dir;
            }
            if let Some(f) = formulation {
                cfg.formulation = match f.as_str() {
                    "scalable" => gridplan::report::FormulationId::Scalable,
                    "full" => gridplan::report::FormulationId::Full,
                    other => {
                        return Err(gridplan::Error::Validation(vec![format!(
                            "unknown formulation {other}"
                        )]))
                    }
                };
            }
            if let Some(l) = lambda {
                cfg.lambdas = vec![l];
            }
            if let Some(v) = voll {
                cfg.volls = vec![v];
            }
            cfg.dump_islands |= dump_islands;
            let outcomes = cmd_plan(&cfg)?;
            for o in &outcomes {
                println!(
                    "voll={} lambda={}: {} lines, {:.1} kWh storage, expected ${:.2}/yr, cvar ${:.2}/yr",
                    o.voll_usd_per_kwh,
                    o.lambda,
                    o.lines_built,
                    o.storage_kwh_total,
                    o.expected_loss_cost_usd_per_year,
                    o.cvar_loss_cost_usd_per_year,
                );
            }
            Ok(())
        }
        Command::Simulate => {
            let reports = cmd_simulate(&cfg)?;
            for (name, r) in &reports {
                println!(
                    "{name}: avg ENS {:.2} kWh/yr, cvar1 {:.2}, saifi {:.4}, saidi {:.4} h",
                    r.avg_annual_ens_kwh, r.cvar1_annual_ens_kwh, r.avg_saifi, r.avg_saidi_h
                );
            }
            Ok(())
        }
        Command::Replay { event, day, start } => {
            cmd_replay(&cfg, &event, day, start.saturating_sub(1))
        }
        Command::Report => cmd_report(&cfg),
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
