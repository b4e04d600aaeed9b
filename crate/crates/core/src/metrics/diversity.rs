//! Diversity of a set of generated texts, optionally contrasted with the
//! texts a model was trained on.
//!
//! "New" here means: not an exact match (after lowercasing and whitespace
//! normalization) of anything in the training references, measured over
//! whole texts and over single sentences. Counts of unique sentences and
//! token types, plus pooled n-gram entropies, summarize how varied the
//! output set itself is.

use std::collections::BTreeSet;

use crate::corpus::{lowercase_keep_placeholders, split_sentences};

use super::{eval_tokens, ngram_entropy};

/// Diversity summary of a set of output texts.
#[derive(Debug, Clone, PartialEq)]
pub struct DiversityReport {
    /// Distinct sentences among the outputs after normalization.
    pub unique_sentences: usize,
    /// Distinct token types among the outputs (punctuation tokens included).
    pub unique_words: usize,
    /// Entropy in bits of the output token distribution.
    pub word_entropy_bits: f64,
    /// Entropy in bits of the pooled 1/2/3-gram distribution of the outputs.
    pub ngram_entropy_bits: f64,
    /// Percentage of output texts that match no training reference exactly.
    pub pct_new_texts: f64,
    /// Percentage of output sentence occurrences that appear in no training
    /// reference sentence.
    pub pct_new_sentences: f64,
}

/// Lowercase (keeping slot placeholders) and collapse runs of whitespace, so
/// that texts differing only in case or spacing compare equal.
fn normalize(text: &str) -> String {
    lowercase_keep_placeholders(text)
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

/// Compute diversity statistics for `outputs`, scoring novelty against
/// `training_references`. An empty output set yields an all-zero report.
pub fn diversity_stats(outputs: &[String], training_references: &[String]) -> DiversityReport {
    let norm_outputs: Vec<String> = outputs.iter().map(|t| normalize(t)).collect();
    let train_texts: BTreeSet<String> =
        training_references.iter().map(|t| normalize(t)).collect();
    let train_sentences: BTreeSet<String> = training_references
        .iter()
        .flat_map(|t| split_sentences(&normalize(t)))
        .collect();

    let output_sentences: Vec<String> = norm_outputs
        .iter()
        .flat_map(|t| split_sentences(t))
        .collect();
    let unique_sentences = output_sentences.iter().collect::<BTreeSet<_>>().len();
    let unique_words = norm_outputs
        .iter()
        .flat_map(|t| eval_tokens(t))
        .collect::<BTreeSet<_>>()
        .len();

    // The entropy contract rejects empty corpora; an output set with no
    // tokens at all simply reports zero bits.
    let word_entropy_bits = ngram_entropy(&norm_outputs, &[1]).unwrap_or(0.0);
    let ngram_entropy_bits = ngram_entropy(&norm_outputs, &[1, 2, 3]).unwrap_or(0.0);

    let pct = |new: usize, total: usize| {
        if total == 0 {
            0.0
        } else {
            100.0 * new as f64 / total as f64
        }
    };
    let new_texts = norm_outputs
        .iter()
        .filter(|t| !train_texts.contains(*t))
        .count();
    let new_sentences = output_sentences
        .iter()
        .filter(|s| !train_sentences.contains(*s))
        .count();

    DiversityReport {
        unique_sentences,
        unique_words,
        word_entropy_bits,
        ngram_entropy_bits,
        pct_new_texts: pct(new_texts, norm_outputs.len()),
        pct_new_sentences: pct(new_sentences, output_sentences.len()),
    }
}
