//! `d2t generate`: beam-search decoding of a checkpoint over an input file,
//! writing an n-best hypothesis file (optionally relexicalized).

use std::path::PathBuf;

use clap::Args;
use d2t_core::corpus::format::write_nbest;
use d2t_core::corpus::{relexicalize, tokenize, TokenMode};
use d2t_core::seq2seq::{beam_decode, load_checkpoint};

use crate::commands::{print_run, read_inputs_any};
use crate::error::{CliError, CliResult};

#[derive(Args, Debug)]
pub struct GenerateArgs {
    /// Trained checkpoint to decode with.
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Inputs: an instance file or one serialized input per line.
    #[arg(long)]
    pub inputs: PathBuf,
    /// Output n-best file (`log_prob TAB text` blocks).
    #[arg(long)]
    pub out: PathBuf,
    /// Beam width.
    #[arg(long, default_value_t = 30)]
    pub beam: usize,
    /// How many hypotheses to keep per input (capped by the beam width).
    #[arg(long, default_value_t = 1)]
    pub n_best: usize,
    /// Decode-length cap in tokens; defaults to 80 for word models and 400
    /// for character models.
    #[arg(long)]
    pub max_len: Option<usize>,
    /// Substitute original surface values back into the output using the
    /// instance file's recorded placeholders.
    #[arg(long, default_value_t = false)]
    pub relex: bool,
}

pub fn run(args: &GenerateArgs) -> CliResult<()> {
    let model = load_checkpoint(&args.checkpoint)?;
    let mode = model.config.mode;
    let max_len = args.max_len.unwrap_or(match mode {
        TokenMode::Word => 80,
        TokenMode::Char => 400,
    });
    print_run(
        "generate",
        &[
            ("checkpoint", args.checkpoint.display().to_string()),
            ("inputs", args.inputs.display().to_string()),
            ("mode", mode.as_str().to_string()),
            ("beam", args.beam.to_string()),
            ("n_best", args.n_best.to_string()),
            ("max_len", max_len.to_string()),
            ("relex", args.relex.to_string()),
            ("out", args.out.display().to_string()),
        ],
    );
    if args.n_best == 0 || args.beam == 0 {
        return Err(CliError::usage("--beam and --n-best must be at least 1"));
    }

    let (instances, is_instance_file) = read_inputs_any(&args.inputs)?;
    if instances.is_empty() {
        return Err(CliError::Core(d2t_core::error::Error::data(format!(
            "{}: no inputs",
            args.inputs.display()
        ))));
    }
    if args.relex && !is_instance_file {
        return Err(CliError::usage(
            "--relex needs an instance file with recorded placeholder values",
        ));
    }

    let mut lists: Vec<Vec<(f64, String)>> = Vec::with_capacity(instances.len());
    for inst in &instances {
        let ids = model
            .input_vocab
            .encode(&tokenize(&inst.input, mode));
        let hyps = beam_decode(&model, &ids, args.beam, max_len)?;
        let mut list = Vec::new();
        for hyp in hyps.into_iter().take(args.n_best) {
            let tokens = model.output_vocab.decode(&hyp.tokens)?;
            let mut text = mode.join(&tokens);
            if args.relex {
                text = relexicalize(&text, &inst.delex);
            }
            list.push((hyp.log_prob, text));
        }
        lists.push(list);
    }

    write_nbest(&args.out, &lists)?;
    println!(
        "wrote {} hypothesis lists ({} hypotheses) to {}",
        lists.len(),
        lists.iter().map(Vec::len).sum::<usize>(),
        args.out.display()
    );
    Ok(())
}
