//! `bp-sim`: experiment front end for the back-pressure simulator.
//!
//! Exit codes: 0 success (and all checks passed for `verify`), 1 a verify
//! check failed, 2 parse or usage error, 3 scenario invariant violation.

mod commands;
mod output;
mod scenario_file;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bp-sim", version, about = "Back-pressure network simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write CSV outputs plus a manifest.
    Run {
        /// Built-in name (linear40, grid16, diamond8) or scenario file path.
        #[arg(long)]
        scenario: String,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
        /// Override a scenario key, e.g. --set beta=0.97 (repeatable).
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Override the run length in slots (warmup resets to half).
        #[arg(long)]
        slots: Option<u64>,
    },
    /// Sweep one parameter over a value list with seed replications.
    Sweep {
        /// Built-in name or scenario file path.
        #[arg(long)]
        scenario: String,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
        /// Swept parameter: lambda, beta, m, or n.
        #[arg(long)]
        param: String,
        /// Comma-separated value list, e.g. --values 5,6,7.
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
        /// Number of replications per value (seeds 1..=n).
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        /// Override a scenario key before sweeping (repeatable).
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Override the run length in slots.
        #[arg(long)]
        slots: Option<u64>,
    },
    /// Run a verification suite: oracle, scaling, equivalence, or stability.
    Verify {
        #[arg(long)]
        suite: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { scenario, out, set, slots } => {
            commands::cmd_run(scenario, out, set, *slots).map(|()| ExitCode::SUCCESS)
        }
        Command::Sweep { scenario, out, param, values, seeds, set, slots } => {
            commands::cmd_sweep(scenario, out, param, values, *seeds, set, *slots)
                .map(|()| ExitCode::SUCCESS)
        }
        Command::Verify { suite } => commands::cmd_verify(suite)
            .map(|all_pass| if all_pass { ExitCode::SUCCESS } else { ExitCode::from(1) }),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
