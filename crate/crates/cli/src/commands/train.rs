//! `d2t train`: fit an encoder-decoder on a preprocessed corpus and save
//! the best-dev checkpoint plus a per-epoch log.

use std::path::PathBuf;

use clap::Args;
use d2t_core::corpus::format::read_instances;
use d2t_core::error::Error;
use d2t_core::seq2seq::{
    encode_pairs, preset, save_checkpoint, train, Model, EpochLog, PRESET_KEYS,
};

use crate::config::{describe, FileConfig, Overrides};
use crate::error::{CliError, CliResult};

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Training corpus (instance file).
    #[arg(long)]
    pub train: PathBuf,
    /// Development corpus (instance file) driving checkpoint selection and
    /// learning-rate halving.
    #[arg(long)]
    pub dev: PathBuf,
    /// Named preset supplying all defaults.
    #[arg(long)]
    pub preset: String,
    /// Random seed (initialization, shuffling, dropout).
    #[arg(long)]
    pub seed: u64,
    /// Checkpoint output path; the epoch log is written next to it with
    /// `.log` appended.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional flat `key = value` config file overriding the preset.
    #[arg(long)]
    pub config: Option<PathBuf>,

    // Flag overrides, applied after the config file.
    #[arg(long)]
    pub max_epochs: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub dropout: Option<f64>,
}

fn epoch_line(e: &EpochLog) -> String {
    format!(
        "epoch {}\ttrain_loss {:.6}\tdev_ppl {:.6}\tlr {:e}\timproved {}\thalved {}",
        e.epoch, e.train_loss, e.dev_perplexity, e.learning_rate, e.improved, e.halved
    )
}

pub fn run(args: &TrainArgs) -> CliResult<()> {
    let preset = preset(&args.preset).ok_or_else(|| {
        CliError::usage(format!(
            "unknown preset {:?} (known: {})",
            args.preset,
            PRESET_KEYS.join(", ")
        ))
    })?;
    let mut model_config = preset.model;
    let mut schedule = preset.schedule;
    if let Some(path) = &args.config {
        FileConfig::load(path)?
            .overrides()?
            .apply(&mut model_config, &mut schedule);
    }
    Overrides {
        max_epochs: args.max_epochs,
        learning_rate: args.learning_rate,
        batch_size: args.batch_size,
        dropout: args.dropout,
        ..Default::default()
    }
    .apply(&mut model_config, &mut schedule);

    println!("run: train");
    println!("  train = {}", args.train.display());
    println!("  dev = {}", args.dev.display());
    println!("  preset = {}", preset.key);
    println!("  out = {}", args.out.display());
    println!("{}", describe(&model_config, &schedule, args.seed));

    let train_instances = read_instances(&args.train)?;
    let dev_instances = read_instances(&args.dev)?;
    let (input_vocab, output_vocab, stats) =
        d2t_core::corpus::build_vocabularies(&train_instances, model_config.mode)?;
    println!(
        "corpus: {} train / {} dev instances, vocab {} -> {}",
        stats.instances,
        dev_instances.len(),
        stats.input_vocab,
        stats.output_vocab
    );

    let train_pairs = encode_pairs(&train_instances, &input_vocab, &output_vocab)?;
    let dev_pairs = encode_pairs(&dev_instances, &input_vocab, &output_vocab)?;
    let model = Model::new(model_config, input_vocab, output_vocab, args.seed)?;
    let outcome = train(&model, &train_pairs, &dev_pairs, &schedule, args.seed)?;

    let mut log_lines: Vec<String> = outcome.log.iter().map(epoch_line).collect();
    log_lines.push(format!(
        "best epoch {}\tbest_dev_ppl {:.6}\tbaseline_dev_ppl {:.6}",
        outcome.best_epoch, outcome.best_dev_perplexity, outcome.baseline_dev_perplexity
    ));
    for line in &log_lines {
        println!("{line}");
    }

    // Both artifacts exist in full before either write.
    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(Error::from)?;
        }
    }
    save_checkpoint(&outcome.model, &args.out)?;
    let log_path = PathBuf::from(format!("{}.log", args.out.display()));
    let mut log_text = log_lines.join("\n");
    log_text.push('\n');
    std::fs::write(&log_path, log_text).map_err(Error::from)?;
    println!(
        "saved checkpoint to {} (log: {})",
        args.out.display(),
        log_path.display()
    );
    Ok(())
}
