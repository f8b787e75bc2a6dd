//! `automata` — generate cellular-automaton instruction datasets, train a
//! small sequence model on them, run learned or exact inference, and score
//! the results.

mod cmd_eval;
mod cmd_gen;
mod cmd_infer;
mod cmd_train;
mod common;

use anyhow::Result;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "automata",
    version,
    about = "2D binary cellular automata: dataset generation, sequence-model training, inference, and evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a rule set and an instruction-formatted dataset
    Gen(cmd_gen::GenArgs),
    /// Train a decoder-only sequence model on a generated dataset
    Train(cmd_train::TrainArgs),
    /// Predict withheld fields with a checkpoint or the exact solver
    Infer(cmd_infer::InferArgs),
    /// Score predictions and emit report files
    Eval(cmd_eval::EvalArgs),
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Gen(args) => cmd_gen::run(args),
        Command::Train(args) => cmd_train::run(args),
        Command::Infer(args) => cmd_infer::run(args),
        Command::Eval(args) => cmd_eval::run(args),
    }
}
