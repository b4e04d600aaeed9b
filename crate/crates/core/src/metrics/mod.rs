//! Corpus-level evaluation of generated text.
//!
//! Everything here scores *surface strings*: n-gram overlap against references
//! ([`bleu`], [`rouge`]), distributional diversity of a system's outputs
//! ([`entropy`], [`diversity`]), and a reference-only baseline that estimates
//! how well the references themselves would score as predictions
//! ([`human_eval`]).
//!
//! All metrics share one tokenization: the text is lowercased (slot
//! placeholders such as `NAME` are preserved verbatim) and split with the
//! corpus word tokenizer. Scores that have a natural percentage reading
//! (BLEU, ROUGE-L, novelty rates) are reported on a 0–100 scale; entropies
//! are in bits.

pub mod bleu;
pub mod diversity;
pub mod entropy;
pub mod human_eval;
pub mod rouge;

pub use bleu::{corpus_bleu, bleu_breakdown, BleuBreakdown, BLEU_MAX_ORDER};
pub use diversity::{diversity_stats, DiversityReport};
pub use entropy::ngram_entropy;
pub use human_eval::{
    drop_one_reference, leave_one_out_human_eval, FoldScore, HumanEvalReport,
};
pub use rouge::{lcs_len, rouge_l, rouge_l_per_instance, ROUGE_BETA};

use crate::corpus::{lowercase_keep_placeholders, tokenize, TokenMode};
use crate::error::Result;

/// Tokenize a text the way every metric in this module sees it: lowercase
/// (keeping slot placeholders intact), then word-tokenize.
pub fn eval_tokens(text: &str) -> Vec<String> {
    tokenize(&lowercase_keep_placeholders(text), TokenMode::Word)
}

/// Overlap scores for one system on one test set.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    /// Corpus BLEU on the 0–100 scale.
    pub bleu: f64,
    /// Mean ROUGE-L F-score on the 0–100 scale.
    pub rouge_l: f64,
    /// Matched/total n-gram counts and brevity penalty behind `bleu`.
    pub bleu_breakdown: BleuBreakdown,
    /// Per-instance ROUGE-L F-scores (0–100), aligned with the hypotheses.
    pub rouge_per_instance: Vec<f64>,
}

/// Score `hypotheses` against per-instance `references` with both overlap
/// metrics at once.
///
/// `hypotheses[i]` is evaluated against the reference set `references[i]`;
/// the two slices must have equal, nonzero length and every instance must
/// have at least one reference.
pub fn evaluate(hypotheses: &[String], references: &[Vec<String>]) -> Result<EvalReport> {
    let breakdown = bleu_breakdown(hypotheses, references)?;
    let per_instance = rouge_l_per_instance(hypotheses, references)?;
    let rouge = per_instance.iter().sum::<f64>() / per_instance.len() as f64;
    Ok(EvalReport {
        bleu: breakdown.score,
        rouge_l: rouge,
        bleu_breakdown: breakdown,
        rouge_per_instance: per_instance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn owned(texts: &[&str]) -> Vec<String> {
        texts.iter().map(|t| t.to_string()).collect()
    }

    #[test]
    fn evaluate_reports_both_metrics_on_percentage_scale() {
        let hyps = owned(&["the cat sat on the mat", "a dog runs"]);
        let refs = vec![
            owned(&["the cat sat on the mat"]),
            owned(&["a dog runs", "the dog ran"]),
        ];
        let report = evaluate(&hyps, &refs).unwrap();
        assert!((0.0..=100.0).contains(&report.bleu));
        assert!((0.0..=100.0).contains(&report.rouge_l));
        assert_eq!(report.rouge_per_instance.len(), 2);
        // Both hypotheses match a reference exactly.
        assert!((report.rouge_l - 100.0).abs() < 1e-9);
        assert!((report.bleu - 100.0).abs() < 1e-9);
    }

    #[test]
    fn eval_tokens_lowercases_but_keeps_placeholders() {
        assert_eq!(
            eval_tokens("NAME is Near the River."),
            vec!["NAME", "is", "near", "the", "river", "."]
        );
    }
}
