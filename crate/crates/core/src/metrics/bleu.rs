//! Corpus BLEU: clipped n-gram precision with a brevity penalty.
//!
//! The score is corpus-level: matched and total n-gram counts are summed over
//! all instances before any precision is formed, and the brevity penalty
//! compares the total hypothesis length to the total of per-instance closest
//! reference lengths. No smoothing is applied — a corpus with zero matches at
//! any order scores 0.

use std::collections::HashMap;

use crate::error::{Error, Result};

use super::eval_tokens;

/// Highest n-gram order entering the score (1 through 4).
pub const BLEU_MAX_ORDER: usize = 4;

/// The counts and factors behind a corpus BLEU score.
#[derive(Debug, Clone, PartialEq)]
pub struct BleuBreakdown {
    /// Clipped matched n-gram counts, index 0 = unigrams.
    pub matched: [usize; BLEU_MAX_ORDER],
    /// Total hypothesis n-gram counts, index 0 = unigrams.
    pub total: [usize; BLEU_MAX_ORDER],
    /// `matched[n] / total[n]`, or 0 when the total is 0.
    pub precisions: [f64; BLEU_MAX_ORDER],
    /// Summed hypothesis token count.
    pub hypothesis_length: usize,
    /// Summed closest-reference token count (ties broken toward the shorter
    /// reference).
    pub reference_length: usize,
    /// 1 when the hypotheses are longer than the references, otherwise
    /// `exp(1 - r/c)`.
    pub brevity_penalty: f64,
    /// Final corpus BLEU on the 0–100 scale.
    pub score: f64,
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if n > 0 && tokens.len() >= n {
        for window in tokens.windows(n) {
            *counts.entry(window).or_insert(0) += 1;
        }
    }
    counts
}

fn check_shapes(hypotheses: &[String], references: &[Vec<String>]) -> Result<()> {
    if hypotheses.is_empty() {
        return Err(Error::contract("bleu: empty hypothesis list"));
    }
    if hypotheses.len() != references.len() {
        return Err(Error::contract(format!(
            "bleu: {} hypotheses but {} reference sets",
            hypotheses.len(),
            references.len()
        )));
    }
    if let Some(i) = references.iter().position(|r| r.is_empty()) {
        return Err(Error::contract(format!(
            "bleu: instance {i} has no references"
        )));
    }
    Ok(())
}

/// Corpus BLEU of `hypotheses` against per-instance `references`, 0–100.
pub fn corpus_bleu(hypotheses: &[String], references: &[Vec<String>]) -> Result<f64> {
    Ok(bleu_breakdown(hypotheses, references)?.score)
}

/// Corpus BLEU together with the counts it was formed from.
pub fn bleu_breakdown(
    hypotheses: &[String],
    references: &[Vec<String>],
) -> Result<BleuBreakdown> {
    check_shapes(hypotheses, references)?;

    let mut matched = [0usize; BLEU_MAX_ORDER];
    let mut total = [0usize; BLEU_MAX_ORDER];
    let mut hyp_len = 0usize;
    let mut ref_len = 0usize;

    for (hyp, refs) in hypotheses.iter().zip(references) {
        let hyp_tokens = eval_tokens(hyp);
        let ref_tokens: Vec<Vec<String>> = refs.iter().map(|r| eval_tokens(r)).collect();

        hyp_len += hyp_tokens.len();
        // Closest reference length; ties go to the shorter reference.
        ref_len += ref_tokens
            .iter()
            .map(|r| r.len())
            .min_by_key(|&len| (len.abs_diff(hyp_tokens.len()), len))
            .expect("instances checked non-empty");

        for (n_idx, n) in (1..=BLEU_MAX_ORDER).enumerate() {
            let hyp_counts = ngram_counts(&hyp_tokens, n);
            let mut max_ref_counts: HashMap<&[String], usize> = HashMap::new();
            for r in &ref_tokens {
                for (gram, count) in ngram_counts(r, n) {
                    let entry = max_ref_counts.entry(gram).or_insert(0);
                    *entry = (*entry).max(count);
                }
            }
            for (gram, count) in &hyp_counts {
                total[n_idx] += count;
                matched[n_idx] += (*count).min(max_ref_counts.get(gram).copied().unwrap_or(0));
            }
        }
    }

    let mut precisions = [0.0f64; BLEU_MAX_ORDER];
    for i in 0..BLEU_MAX_ORDER {
        if total[i] > 0 {
            precisions[i] = matched[i] as f64 / total[i] as f64;
        }
    }

    let brevity_penalty = if hyp_len == 0 {
        0.0
    } else if hyp_len > ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    };

    let score = if precisions.iter().any(|&p| p == 0.0) {
        0.0
    } else {
        let mean_log = precisions.iter().map(|p| p.ln()).sum::<f64>() / BLEU_MAX_ORDER as f64;
        100.0 * brevity_penalty * mean_log.exp()
    };

    Ok(BleuBreakdown {
        matched,
        total,
        precisions,
        hypothesis_length: hyp_len,
        reference_length: ref_len,
        brevity_penalty,
        score,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn owned(texts: &[&str]) -> Vec<String> {
        texts.iter().map(|t| t.to_string()).collect()
    }

    #[test]
    fn identical_corpus_scores_one_hundred() {
        let hyps = owned(&["the cat sat on the mat", "there is a dog in the park ."]);
        let refs: Vec<Vec<String>> = hyps.iter().map(|h| vec![h.clone()]).collect();
        let b = bleu_breakdown(&hyps, &refs).unwrap();
        assert_relative_eq!(b.score, 100.0, epsilon = 1e-9);
        assert_eq!(b.brevity_penalty, 1.0);
        assert_eq!(b.matched, b.total);
    }

    #[test]
    fn short_perfect_prefix_matches_hand_computation() {
        // Hand oracle: hypothesis "the cat sat" (3 tokens) against reference
        // "the cat sat on the mat" (6 tokens).
        //   unigrams: the/cat/sat all present          -> 3/3
        //   bigrams:  "the cat", "cat sat" present     -> 2/2
        //   trigrams: "the cat sat" present            -> 1/1
        //   4-grams:  the hypothesis has none          -> 0/0
        //   brevity penalty: c=3 < r=6 -> exp(1 - 6/3) = e^-1
        // With no smoothing the absent 4-gram order zeroes the final score.
        let hyps = owned(&["the cat sat"]);
        let refs = vec![owned(&["the cat sat on the mat"])];
        let b = bleu_breakdown(&hyps, &refs).unwrap();
        assert_eq!(b.matched, [3, 2, 1, 0]);
        assert_eq!(b.total, [3, 2, 1, 0]);
        assert_eq!(b.precisions, [1.0, 1.0, 1.0, 0.0]);
        assert_eq!(b.hypothesis_length, 3);
        assert_eq!(b.reference_length, 6);
        assert_relative_eq!(b.brevity_penalty, (-1.0f64).exp(), epsilon = 1e-12);
        assert_eq!(b.score, 0.0);
    }

    #[test]
    fn two_instance_corpus_matches_hand_computation() {
        // Second hand oracle with a nonzero final score. Instance 1 is exact;
        // instance 2 "a dog runs fast today" against two references:
        //   "a dog runs very fast today" and "a dog sprints fast".
        // Per-order clipped counts (instance 1 + instance 2):
        //   1-grams: 6+5 matched / 6+5 total  = 11/11
        //   2-grams: 5+3 / 5+4               = 8/9
        //   3-grams: 4+1 / 4+3               = 5/7
        //   4-grams: 3+0 / 3+2               = 3/5
        // Closest reference lengths: 6 and (tie between 6 and 4 -> shorter) 4,
        // so c=11 > r=10 and the brevity penalty is 1.
        let hyps = owned(&["the cat sat on the mat", "a dog runs fast today"]);
        let refs = vec![
            owned(&["the cat sat on the mat"]),
            owned(&["a dog runs very fast today", "a dog sprints fast"]),
        ];
        let b = bleu_breakdown(&hyps, &refs).unwrap();
        assert_eq!(b.matched, [11, 8, 5, 3]);
        assert_eq!(b.total, [11, 9, 7, 5]);
        assert_eq!(b.hypothesis_length, 11);
        assert_eq!(b.reference_length, 10);
        assert_eq!(b.brevity_penalty, 1.0);
        let expected = 100.0 * (1.0f64 * (8.0 / 9.0) * (5.0 / 7.0) * (3.0 / 5.0)).powf(0.25);
        assert_relative_eq!(b.score, expected, epsilon = 1e-12);
        assert_relative_eq!(b.score, 78.56293, epsilon = 1e-5);
    }

    #[test]
    fn clipping_caps_repeated_hypothesis_ngrams() {
        // "the the the" against refs holding at most two "the" in one
        // reference: unigram matched is clipped at 2, and the repeated bigram
        // "the the" is clipped at 1.
        let hyps = owned(&["the the the"]);
        let refs = vec![owned(&["the cat", "the the dog"])];
        let b = bleu_breakdown(&hyps, &refs).unwrap();
        assert_eq!(b.matched, [2, 1, 0, 0]);
        assert_eq!(b.total, [3, 2, 1, 0]);
        assert_eq!(b.score, 0.0);
    }

    #[test]
    fn closest_length_ties_resolve_to_shorter_reference() {
        // Hypothesis length 3 with references of lengths 2 and 4: both are at
        // distance 1, so the shorter (2) is chosen, making c > r and BP = 1.
        let hyps = owned(&["a b c"]);
        let refs = vec![owned(&["a b", "a b c d"])];
        let b = bleu_breakdown(&hyps, &refs).unwrap();
        assert_eq!(b.reference_length, 2);
        assert_eq!(b.brevity_penalty, 1.0);
    }

    #[test]
    fn instance_order_does_not_change_the_score() {
        let hyps = owned(&["the cat sat on the mat", "a dog runs fast today", "hello out there ."]);
        let refs = vec![
            owned(&["the cat sat on the mat"]),
            owned(&["a dog runs very fast today", "a dog sprints fast"]),
            owned(&["hello out there friend ."]),
        ];
        let forward = bleu_breakdown(&hyps, &refs).unwrap();
        let rev_hyps: Vec<String> = hyps.iter().rev().cloned().collect();
        let rev_refs: Vec<Vec<String>> = refs.iter().rev().cloned().collect();
        let reversed = bleu_breakdown(&rev_hyps, &rev_refs).unwrap();
        assert_eq!(forward, reversed);
    }

    #[test]
    fn tokenization_is_case_insensitive_with_placeholders_kept() {
        // Ordinary words are compared lowercased, so differing case is an
        // exact match as long as placeholders line up.
        let hyps = owned(&["NAME Is A Pub Near NEAR ."]);
        let refs = vec![owned(&["NAME is a pub near NEAR ."])];
        assert_relative_eq!(
            corpus_bleu(&hyps, &refs).unwrap(),
            100.0,
            epsilon = 1e-9
        );
        // But a placeholder is its own token: literal lowercase "name" in a
        // reference does not match the NAME placeholder.
        let literal_refs = vec![owned(&["name is a pub near near ."])];
        assert!(corpus_bleu(&hyps, &literal_refs).unwrap() < 100.0);
    }

    #[test]
    fn shape_violations_are_contract_errors() {
        let refs = vec![owned(&["a"])];
        assert!(matches!(
            corpus_bleu(&[], &refs),
            Err(Error::Contract(_))
        ));
        assert!(matches!(
            corpus_bleu(&owned(&["a", "b"]), &refs),
            Err(Error::Contract(_))
        ));
        assert!(matches!(
            corpus_bleu(&owned(&["a"]), &[vec![]]),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn empty_hypothesis_strings_score_zero_without_error() {
        let hyps = owned(&[""]);
        let refs = vec![owned(&["a b c"])];
        let b = bleu_breakdown(&hyps, &refs).unwrap();
        assert_eq!(b.hypothesis_length, 0);
        assert_eq!(b.score, 0.0);
        assert_eq!(b.brevity_penalty, 0.0);
    }
}
