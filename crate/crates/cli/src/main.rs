//! `degenpop`: design and simulate complete population transfer in
//! degenerate n-state systems.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

mod commands;
mod config;
mod error;
mod output;
mod selftest;

use commands::{DesignArgs, Globals, KickArgs, LeakageArgs, SimulateArgs};
use config::RunConfig;
use error::CliResult;
use selftest::SelftestArgs;

#[derive(Debug, Parser)]
#[command(name = "degenpop", version, about, propagate_version = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Configuration file with [system], [design], [pulse], [run] sections.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Write the main output (CSV or design values) here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Write an SVG plot of the populations (simulate, kick).
    #[arg(long, global = true)]
    svg: Option<PathBuf>,

    /// Machine-readable `key=value` output.
    #[arg(long, global = true)]
    porcelain: bool,

    /// Seed for randomized property checks.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Coupling ratios and pulse area for complete 1 -> 2 transfer.
    Design(DesignArgs),
    /// Time evolution under a smooth pulse, as CSV.
    Simulate(SimulateArgs),
    /// Time evolution under a train of delta kicks, as CSV.
    Kick(KickArgs),
    /// Leakage out of the target state versus level splitting.
    Leakage(LeakageArgs),
    /// Run the built-in invariant checks.
    Selftest(SelftestArgs),
}

fn run(cli: Cli) -> CliResult<()> {
    let config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let g = Globals {
        config,
        out: cli.out,
        svg: cli.svg,
        porcelain: cli.porcelain,
        seed: cli.seed,
    };
    match &cli.command {
        Command::Design(a) => commands::design(&g, a),
        Command::Simulate(a) => commands::simulate(&g, a),
        Command::Kick(a) => commands::kick(&g, a),
        Command::Leakage(a) => commands::leakage(&g, a),
        Command::Selftest(a) => selftest::selftest(&g, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            eprintln!("error=Usage");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("degenpop: {e}");
            eprintln!("error={}", e.name());
            ExitCode::from(e.exit_code())
        }
    }
}
