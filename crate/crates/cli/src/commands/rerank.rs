//! `d2t rerank`: stable reordering of n-best hypothesis lists by
//! attribute-matching error points against their inputs.

use std::path::PathBuf;

use clap::Args;
use d2t_core::corpus::format::{read_lines, read_nbest, write_nbest};
use d2t_core::corpus::parse_e2e_mr;
use d2t_core::error::Error;
use d2t_core::rerank::{rerank_indices, score, AttributeLexicon};

use crate::commands::print_run;
use crate::error::{CliError, CliResult};

#[derive(Args, Debug)]
pub struct RerankArgs {
    /// Meaning representations, one serialized restaurant input per line,
    /// aligned with the hypothesis blocks.
    #[arg(long)]
    pub mrs: PathBuf,
    /// N-best hypothesis file from `generate`.
    #[arg(long)]
    pub hypotheses: PathBuf,
    /// Reranked n-best output file.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional phrase-table file; defaults to the built-in table.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
}

pub fn run(args: &RerankArgs) -> CliResult<()> {
    print_run(
        "rerank",
        &[
            ("mrs", args.mrs.display().to_string()),
            ("hypotheses", args.hypotheses.display().to_string()),
            (
                "lexicon",
                args.lexicon
                    .as_ref()
                    .map(|p| p.display().to_string())
                    .unwrap_or_else(|| "<builtin>".to_string()),
            ),
            ("out", args.out.display().to_string()),
        ],
    );
    let lexicon = match &args.lexicon {
        Some(path) => AttributeLexicon::from_path(path)?,
        None => AttributeLexicon::builtin(),
    };

    let mr_lines: Vec<String> = read_lines(&args.mrs)?
        .into_iter()
        .filter(|l| !l.is_empty())
        .collect();
    let blocks = read_nbest(&args.hypotheses)?;
    if mr_lines.len() != blocks.len() {
        return Err(CliError::Core(Error::data(format!(
            "alignment error: {} inputs in {} but {} hypothesis blocks in {}",
            mr_lines.len(),
            args.mrs.display(),
            blocks.len(),
            args.hypotheses.display()
        ))));
    }

    let mut reranked: Vec<Vec<(f64, String)>> = Vec::with_capacity(blocks.len());
    let mut zero_before = 0usize;
    let mut zero_top1_before = 0usize;
    let mut zero_top1_after = 0usize;
    for (i, (line, block)) in mr_lines.iter().zip(&blocks).enumerate() {
        let mr = parse_e2e_mr(line).map_err(|e| {
            CliError::Core(Error::parse(
                format!("{}:{}", args.mrs.display(), i + 1),
                e.to_string(),
            ))
        })?;
        let texts: Vec<String> = block.iter().map(|(_, t)| t.clone()).collect();
        let zero: Vec<bool> = texts
            .iter()
            .map(|t| score(&mr, t, &lexicon).is_zero())
            .collect();
        zero_before += zero.iter().filter(|&&z| z).count();
        zero_top1_before += usize::from(zero.first().copied().unwrap_or(false));
        let order = rerank_indices(&mr, &texts, &lexicon);
        zero_top1_after += usize::from(order.first().is_some_and(|&j| zero[j]));
        reranked.push(order.into_iter().map(|j| block[j].clone()).collect());
    }

    write_nbest(&args.out, &reranked)?;
    println!(
        "reranked {} lists ({} zero-error hypotheses); zero-error at rank 1: {} -> {}",
        reranked.len(),
        zero_before,
        zero_top1_before,
        zero_top1_after
    );
    Ok(())
}
