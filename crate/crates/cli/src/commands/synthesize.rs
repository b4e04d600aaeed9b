//! `d2t synthesize`: template-written training corpora over the restaurant
//! input lattice (or a provided input file), with an optional seeded
//! held-out split for generation experiments.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use d2t_core::corpus::format::{write_instances, write_lines};
use d2t_core::corpus::parse_e2e_mr;
use d2t_core::templates::{
    enumerate_mrs, split_held_out, synthesize_corpus, Lexicon, SynthesisConfig, TemplateId,
};

use crate::commands::print_run;
use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TemplatesArg {
    /// Template 1 only, each pair written twice.
    T1,
    /// Template 2 only, each pair written twice.
    T2,
    /// Both templates, each pair written once (same corpus size).
    T1t2,
}

impl TemplatesArg {
    fn template_ids(self) -> &'static [TemplateId] {
        match self {
            TemplatesArg::T1 => &[TemplateId::T1],
            TemplatesArg::T2 => &[TemplateId::T2],
            TemplatesArg::T1t2 => &[TemplateId::T1, TemplateId::T2],
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            TemplatesArg::T1 => "t1",
            TemplatesArg::T2 => "t2",
            TemplatesArg::T1t2 => "t1t2",
        }
    }
}

#[derive(Args, Debug)]
pub struct SynthesizeArgs {
    /// Which template(s) write the references.
    #[arg(long, value_enum)]
    pub templates: TemplatesArg,
    /// Output instance file.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional input file (one serialized restaurant input per line);
    /// defaults to the full enumerated input lattice.
    #[arg(long)]
    pub inputs: Option<PathBuf>,
    /// Hold this many inputs out of the corpus (seeded shuffle).
    #[arg(long, default_value_t = 0)]
    pub held_out: usize,
    /// Shuffle seed for the held-out split; required when --held-out > 0.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Where to write the held-out inputs (one per line); required when
    /// --held-out > 0.
    #[arg(long)]
    pub held_out_file: Option<PathBuf>,
}

pub fn run(args: &SynthesizeArgs) -> CliResult<()> {
    print_run(
        "synthesize",
        &[
            ("templates", args.templates.as_str().to_string()),
            (
                "inputs",
                args.inputs
                    .as_ref()
                    .map(|p| p.display().to_string())
                    .unwrap_or_else(|| "<full lattice>".to_string()),
            ),
            ("held_out", args.held_out.to_string()),
            (
                "seed",
                args.seed.map(|s| s.to_string()).unwrap_or_else(|| "-".to_string()),
            ),
            ("out", args.out.display().to_string()),
        ],
    );

    let lexicon = Lexicon::builtin();
    let mut mrs = match &args.inputs {
        Some(path) => {
            let lines = d2t_core::corpus::format::read_lines(path)?;
            let mut mrs = Vec::new();
            for (i, line) in lines.iter().enumerate() {
                if line.is_empty() {
                    continue;
                }
                let mr = parse_e2e_mr(line).map_err(|e| {
                    CliError::Core(d2t_core::error::Error::parse(
                        format!("{}:{}", path.display(), i + 1),
                        e.to_string(),
                    ))
                })?;
                mrs.push(mr);
            }
            mrs
        }
        None => enumerate_mrs(&lexicon),
    };

    let held_out = if args.held_out > 0 {
        let seed = args
            .seed
            .ok_or_else(|| CliError::usage("--held-out requires --seed"))?;
        if args.held_out_file.is_none() {
            return Err(CliError::usage("--held-out requires --held-out-file"));
        }
        let (pool, held) = split_held_out(mrs, args.held_out, seed);
        mrs = pool;
        held
    } else {
        Vec::new()
    };

    let config = SynthesisConfig::standard(args.templates.template_ids())?;
    let corpus = synthesize_corpus(&mrs, &config, &lexicon)?;

    // All artifacts are complete before the first write.
    if let Some(path) = &args.held_out_file {
        if args.held_out > 0 {
            let lines: Vec<String> = held_out
                .iter()
                .map(|mr| mr.serialize())
                .collect::<Result<_, _>>()?;
            write_lines(path, &lines)?;
        }
    }
    write_instances(&args.out, &corpus)?;

    println!(
        "wrote {} training pairs from {} inputs ({} held out) to {}",
        corpus.len(),
        mrs.len(),
        held_out.len(),
        args.out.display()
    );
    Ok(())
}
