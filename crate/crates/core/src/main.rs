use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lbwind::io::{check_memory, load_turbines, parse_config, roofline_report, run_simulation, RunConfig};
use lbwind::{Error, Result};

/// Environment variable that overrides `run.workers`.
const WORKERS_ENV: &str = "LBWIND_WORKERS";

#[derive(Parser)]
#[command(name = "lbwind", version, about = "Lattice Boltzmann wind turbine wake solver")]
struct Cli {
    /// Parse and validate the configuration (and its turbine files) only.
    #[arg(long, global = true)]
    validate: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation.
    Run { config: PathBuf },
    /// Print the roofline estimate for the configured machines as JSON.
    Report { config: PathBuf },
}

fn load(path: &PathBuf) -> Result<RunConfig> {
    let mut cfg = parse_config(path)?;
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{WORKERS_ENV} = '{v}' is not a worker count")))?;
        cfg.run.workers = n;
        cfg.resolve()?;
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config } => {
            let cfg = load(&config)?;
            if cli.validate {
                load_turbines(&cfg)?;
                check_memory(&cfg.resolve()?, cfg.run.precision)?;
                print!("{}", cfg.to_toml());
                return Ok(());
            }
            let report = run_simulation(&cfg)?;
            println!(
                "{} steps in {:.2} s, {:.2} MLUPS, output in {}",
                report.steps,
                report.wall_seconds,
                report.mlups,
                cfg.output.directory.display()
            );
            Ok(())
        }
        Command::Report { config } => {
            let cfg = load(&config)?;
            let rows = roofline_report(&cfg)?;
            if !cli.validate {
                let json = serde_json::to_string_pretty(&rows).map_err(|e| Error::Measurement(e.to_string()))?;
                println!("{json}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
