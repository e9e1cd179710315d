//! `isi-dmt`: run sweeps, verify the structural lemma, print diversity
//! brackets and fit slopes to saved curves.

mod bounds;
mod failure;
mod lemma;
mod overrides;
mod simulate;
mod slope;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "isi-dmt", version, about = "Diversity-embedded coding over ISI channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo sweep and write curve.csv, report.json and manifest.json.
    Simulate(simulate::Args),
    /// Check the weak-frequency bound over a grid of channel shapes.
    VerifyLemma(lemma::Args),
    /// Print the diversity brackets for a pair of rates.
    Bounds(bounds::Args),
    /// Fit the diversity slope of a saved curve.
    Slope(slope::Args),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate(a) => simulate::run(a),
        Command::VerifyLemma(a) => lemma::run(a),
        Command::Bounds(a) => bounds::run(a),
        Command::Slope(a) => slope::run(a),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

/// Default output directory when `--out` is not given.
pub(crate) fn default_out() -> PathBuf {
    PathBuf::from("out")
}
