use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use seawatch_cli::commands;

/// Constellation freshness simulator: runs vessel-monitoring scenarios on a
/// LEO walker shell and reports age-of-information and coverage metrics.
#[derive(Parser)]
#[command(name = "seawatch", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output directory (overrides SEAWATCH_OUT_DIR and the scenario file).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write the per-frame ledger.
    Run {
        scenario: PathBuf,
        /// Replaces the seed from the scenario file.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Execute the scenario's [sweep] block and write the result table.
    Sweep { scenario: PathBuf },
    /// Tabulate coverage probability against target latitude.
    Coverage {
        scenario: PathBuf,
        /// Latitude range as start:end:step, e.g. 0:80:5.
        #[arg(long)]
        latitudes: String,
    },
    /// Parse and validate a scenario without simulating.
    Validate { scenario: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out_dir = cli.out_dir.as_deref();
    let outcome = match &cli.command {
        Command::Run { scenario, seed } => {
            commands::cmd_run(scenario, *seed, out_dir).map(|a| a.report)
        }
        Command::Sweep { scenario } => commands::cmd_sweep(scenario, out_dir).map(|a| a.report),
        Command::Coverage { scenario, latitudes } => {
            commands::cmd_coverage(scenario, latitudes, out_dir).map(|a| a.report)
        }
        Command::Validate { scenario } => commands::cmd_validate(scenario),
    };
    match outcome {
        Ok(report) => {
            println!("{report}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
