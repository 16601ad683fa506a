//! `specshare` — train, evaluate and export the spectrum-sharing studies.

mod commands;
mod outputs;
mod runcfg;

use clap::{Parser, Subcommand};
use specshare_core::training::TrainHyperparams;

pub(crate) fn default_hyperparams() -> TrainHyperparams {
    TrainHyperparams::default()
}

#[derive(Parser)]
#[command(
    name = "specshare",
    about = "Subframe-level LTE/NR spectrum sharing: learned-controller training and scripted-baseline studies",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the training loop and write scores, checkpoints and a manifest.
    Train(commands::train::TrainArgs),
    /// Evaluate a checkpoint against the scripted agents on a scenario.
    Eval(commands::eval::EvalArgs),
    /// Exact planner: best action sequence and score for a scenario.
    Oracle(commands::oracle::OracleArgs),
    /// Convert run directories into tidy per-scenario plot data.
    ExportPlotData(commands::export::ExportArgs),
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(args) => commands::train::run(args),
        Command::Eval(args) => commands::eval::run(args),
        Command::Oracle(args) => commands::oracle::run(args),
        Command::ExportPlotData(args) => commands::export::run(args),
    };
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
