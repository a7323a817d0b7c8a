//! `hhcarbon`: household energy and carbon footprints from the command line.

mod commands;
mod error;
mod format;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::{dynamics, effects, footprint, inequality, published, regress, synth};
use crate::io::Log;

#[derive(Debug, Parser)]
#[command(
    name = "hhcarbon",
    version,
    about = "Household energy use, carbon emissions and credit-access regressions"
)]
struct Cli {
    /// Intensity table CSV replacing the built-in 2005–2019 tables.
    #[arg(long, global = true, env = "HHCARBON_TABLE", value_name = "PATH")]
    table: Option<PathBuf>,

    /// Suppress progress and summaries on stderr.
    #[arg(short, long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Per-household energy use, carbon emissions and efficiency.
    Footprint(footprint::Args),
    /// Lorenz curve, Gini coefficient and tail shares.
    Inequality(inequality::Args),
    /// Pooled OLS and within fixed-effects regressions on credit access.
    Regress(regress::Args),
    /// Predicted outcome over a grid of credit amounts.
    Effects(effects::Args),
    /// Carbon per unit of energy over time.
    Dynamics(dynamics::Args),
    /// Check the coefficient identity on the published regression tables.
    ValidatePublished(published::Args),
    /// Generate a synthetic panel with a known data-generating process.
    Synth(synth::Args),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let log = Log { quiet: cli.quiet };
    let table = cli.table.as_ref();
    let result = match cli.command {
        Command::Footprint(a) => footprint::run(a, table, log),
        Command::Inequality(a) => inequality::run(a, table, log),
        Command::Regress(a) => regress::run(a, table, log),
        Command::Effects(a) => effects::run(a, log),
        Command::Dynamics(a) => dynamics::run(a, table, log),
        Command::ValidatePublished(a) => published::run(a, log),
        Command::Synth(a) => synth::run(a, table, log),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hhcarbon: {e}");
            e.exit_code()
        }
    }
}
