//! `d2t`: command-line harness for the data-to-text pipeline — corpus
//! preprocessing, synthetic-corpus generation, model training, beam-search
//! generation, hypothesis reranking, and evaluation.
//!
//! Exit codes: 0 success, 1 usage error, 2 data/computation error,
//! 3 training divergence. Every run prints its fully resolved
//! configuration, and outputs are written only after the computation
//! succeeds in full.

mod commands;
mod config;
mod error;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::error::EXIT_USAGE;

#[derive(Parser, Debug)]
#[command(
    name = "d2t",
    version,
    about = "Data-to-text generation toolkit: preprocess, synthesize, train, generate, rerank, evaluate",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Delexicalize and tokenize a raw dataset into aligned instance files.
    Preprocess(commands::preprocess::PreprocessArgs),
    /// Generate a synthetic template corpus over the closed input lattice.
    Synthesize(commands::synthesize::SynthesizeArgs),
    /// Train a sequence-to-sequence model and write a checkpoint.
    Train(commands::train::TrainArgs),
    /// Beam-search generation from a checkpoint.
    Generate(commands::generate::GenerateArgs),
    /// Reorder n-best lists by semantic error count.
    Rerank(commands::rerank::RerankArgs),
    /// Score hypotheses against references; optional diversity, reference
    /// baseline, and correctness table.
    Evaluate(commands::evaluate::EvaluateArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are successful outcomes; anything else is a
            // usage error (exit 1, not clap's default 2 — 2 means bad data
            // here).
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Preprocess(args) => commands::preprocess::run(args),
        Command::Synthesize(args) => commands::synthesize::run(args),
        Command::Train(args) => commands::train::run(args),
        Command::Generate(args) => commands::generate::run(args),
        Command::Rerank(args) => commands::rerank::run(args),
        Command::Evaluate(args) => commands::evaluate::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
