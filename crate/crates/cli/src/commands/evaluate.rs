//! `d2t evaluate`: overlap metrics against references, plus optional
//! diversity statistics, a leave-one-out reference baseline, and a
//! correctness table over n-best hypotheses.

use std::path::PathBuf;

use clap::Args;
use d2t_core::corpus::format::{read_reference_groups, read_lines, write_lines};
use d2t_core::corpus::parse_e2e_mr;
use d2t_core::error::Error;
use d2t_core::metrics::{
    diversity_stats, drop_one_reference, evaluate, leave_one_out_human_eval,
};
use d2t_core::rerank::{score, AttributeLexicon};
use d2t_core::templates::{classify, TemplateLabel};

use crate::commands::{print_run, read_hypothesis_blocks, read_text_pool};
use crate::error::{CliError, CliResult};

/// The ranks the correctness table reports.
pub const CORRECTNESS_RANKS: [usize; 4] = [1, 2, 5, 30];

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Hypotheses: an n-best file or one top-1 text per line.
    #[arg(long)]
    pub hypotheses: PathBuf,
    /// Reference groups (blank-line-separated blocks), aligned with the
    /// hypotheses.
    #[arg(long)]
    pub references: PathBuf,
    /// Training reference texts (instance file or plain lines) for novelty
    /// statistics.
    #[arg(long)]
    pub training_refs: Option<PathBuf>,
    /// Report output diversity (requires --training-refs).
    #[arg(long, default_value_t = false)]
    pub diversity: bool,
    /// Score the references against each other (leave-one-out folds).
    #[arg(long, default_value_t = false)]
    pub human_eval: bool,
    /// Drop one random reference per instance before scoring the
    /// hypotheses, for a fair comparison with --human-eval (requires
    /// --seed).
    #[arg(long, default_value_t = false)]
    pub drop_one: bool,
    /// Seed for --drop-one.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Serialized inputs (one per line) enabling the correctness table and
    /// the per-hypothesis report.
    #[arg(long)]
    pub mrs: Option<PathBuf>,
    /// Emit the correctness-at-rank table over the n-best lists (requires
    /// --mrs).
    #[arg(long, default_value_t = false)]
    pub correctness: bool,
    /// Write the printed report (plus per-hypothesis lines when --mrs is
    /// given) to this file.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

fn validate(args: &EvaluateArgs) -> CliResult<()> {
    if args.diversity && args.training_refs.is_none() {
        return Err(CliError::usage("--diversity requires --training-refs"));
    }
    if args.correctness && args.mrs.is_none() {
        return Err(CliError::usage("--correctness requires --mrs"));
    }
    if args.drop_one && args.seed.is_none() {
        return Err(CliError::usage("--drop-one requires --seed"));
    }
    Ok(())
}

pub fn run(args: &EvaluateArgs) -> CliResult<()> {
    validate(args)?;
    print_run(
        "evaluate",
        &[
            ("hypotheses", args.hypotheses.display().to_string()),
            ("references", args.references.display().to_string()),
            ("diversity", args.diversity.to_string()),
            ("human_eval", args.human_eval.to_string()),
            ("drop_one", args.drop_one.to_string()),
            ("correctness", args.correctness.to_string()),
        ],
    );

    let blocks = read_hypothesis_blocks(&args.hypotheses)?;
    let mut references = read_reference_groups(&args.references)?;
    if blocks.len() != references.len() {
        return Err(CliError::Core(Error::data(format!(
            "alignment error: {} hypothesis blocks but {} reference groups",
            blocks.len(),
            references.len()
        ))));
    }
    if let Some(i) = blocks.iter().position(Vec::is_empty) {
        return Err(CliError::Core(Error::data(format!(
            "instance {i}: empty hypothesis block"
        ))));
    }
    let mut report = Vec::new();

    // Leave-one-out baseline over the untouched references.
    if args.human_eval {
        let human = leave_one_out_human_eval(&references)?;
        report.push(format!(
            "human-eval folds = {} (instances without >=2 references: {})",
            human.folds.len(),
            human.excluded_single_reference
        ));
        report.push(format!(
            "human-eval BLEU = {:.2} ± {:.2}",
            human.bleu_mean, human.bleu_sd
        ));
        report.push(format!(
            "human-eval ROUGE-L = {:.2} ± {:.2}",
            human.rouge_mean, human.rouge_sd
        ));
    }

    if args.drop_one {
        let seed = args.seed.expect("validated");
        references = drop_one_reference(&references, seed);
        report.push(format!("drop-one applied with seed {seed}"));
    }

    let top1: Vec<String> = blocks
        .iter()
        .map(|b| b[0].1.clone())
        .collect();
    let overlap = evaluate(&top1, &references)?;
    report.push(format!("instances = {}", top1.len()));
    report.push(format!("BLEU = {:.2}", overlap.bleu));
    report.push(format!("ROUGE-L = {:.2}", overlap.rouge_l));

    if args.diversity {
        let pool = read_text_pool(args.training_refs.as_ref().expect("validated"))?;
        let d = diversity_stats(&top1, &pool);
        report.push(format!("unique sentences = {}", d.unique_sentences));
        report.push(format!("unique words = {}", d.unique_words));
        report.push(format!("word entropy = {:.3}", d.word_entropy_bits));
        report.push(format!("1-3gram entropy = {:.3}", d.ngram_entropy_bits));
        report.push(format!("new texts % = {:.2}", d.pct_new_texts));
        report.push(format!("new sentences % = {:.2}", d.pct_new_sentences));
    }

    let mut per_hypothesis: Vec<String> = Vec::new();
    if let Some(mrs_path) = &args.mrs {
        let mr_lines: Vec<String> = read_lines(mrs_path)?
            .into_iter()
            .filter(|l| !l.is_empty())
            .collect();
        if mr_lines.len() != blocks.len() {
            return Err(CliError::Core(Error::data(format!(
                "alignment error: {} inputs in {} but {} hypothesis blocks",
                mr_lines.len(),
                mrs_path.display(),
                blocks.len()
            ))));
        }
        let lexicon = AttributeLexicon::builtin();
        // correct[i][r]: hypothesis r of instance i has zero error points
        // and a recognized template shape. This is a proxy for manual
        // correctness judgments; the per-hypothesis lines below support
        // annotating by hand.
        let mut correct: Vec<Vec<bool>> = Vec::with_capacity(blocks.len());
        for (i, (line, block)) in mr_lines.iter().zip(&blocks).enumerate() {
            let mr = parse_e2e_mr(line).map_err(|e| {
                CliError::Core(Error::parse(
                    format!("{}:{}", mrs_path.display(), i + 1),
                    e.to_string(),
                ))
            })?;
            let mut row = Vec::with_capacity(block.len());
            for (rank, (log_prob, text)) in block.iter().enumerate() {
                let s = score(&mr, text, &lexicon);
                let label = classify(text).label;
                row.push(s.is_zero() && label != TemplateLabel::Other);
                per_hypothesis.push(format!(
                    "instance {i} rank {} log_prob {log_prob:.6} errors {} label {}: {text}",
                    rank + 1,
                    s.total(),
                    label.as_str()
                ));
            }
            correct.push(row);
        }
        if args.correctness {
            let mut cells = Vec::new();
            for &n in &CORRECTNESS_RANKS {
                let mean: f64 = correct
                    .iter()
                    .map(|row| row.iter().take(n).filter(|&&c| c).count() as f64)
                    .sum::<f64>()
                    / correct.len() as f64;
                cells.push(format!("c@{n} = {mean:.2}"));
            }
            report.push(format!(
                "correctness (zero reranker errors and recognized template): {}",
                cells.join("  ")
            ));
        }
    }

    for line in &report {
        println!("{line}");
    }
    if let Some(path) = &args.report {
        let mut lines = report.clone();
        lines.extend(per_hypothesis);
        write_lines(path, &lines)?;
        println!("wrote report to {}", path.display());
    }
    Ok(())
}
