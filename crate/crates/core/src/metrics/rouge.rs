//! ROUGE-L: longest-common-subsequence overlap with a recall-weighted F-score.
//!
//! Each instance scores `max` over its references of
//! `F = (1 + β²)·P·R / (R + β²·P)` with `P = LCS/|hypothesis|`,
//! `R = LCS/|reference|`, and β = 1.2 (recall weighted slightly above
//! precision). The corpus score is the mean over instances, on a 0–100 scale.

use crate::error::{Error, Result};

use super::eval_tokens;

/// Recall weight β in the ROUGE-L F-score.
pub const ROUGE_BETA: f64 = 1.2;

/// Length of the longest common subsequence of two sequences.
pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    // Two-row dynamic program over positions of `a` (rows) and `b` (columns).
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                prev[j + 1].max(cur[j])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

fn f_score(lcs: usize, hyp_len: usize, ref_len: usize) -> f64 {
    if lcs == 0 || hyp_len == 0 || ref_len == 0 {
        return 0.0;
    }
    let p = lcs as f64 / hyp_len as f64;
    let r = lcs as f64 / ref_len as f64;
    let beta_sq = ROUGE_BETA * ROUGE_BETA;
    (1.0 + beta_sq) * p * r / (r + beta_sq * p)
}

fn check_shapes(hypotheses: &[String], references: &[Vec<String>]) -> Result<()> {
    if hypotheses.is_empty() {
        return Err(Error::contract("rouge: empty hypothesis list"));
    }
    if hypotheses.len() != references.len() {
        return Err(Error::contract(format!(
            "rouge: {} hypotheses but {} reference sets",
            hypotheses.len(),
            references.len()
        )));
    }
    if let Some(i) = references.iter().position(|r| r.is_empty()) {
        return Err(Error::contract(format!(
            "rouge: instance {i} has no references"
        )));
    }
    Ok(())
}

/// Per-instance ROUGE-L F-scores (0–100), aligned with the hypotheses.
pub fn rouge_l_per_instance(
    hypotheses: &[String],
    references: &[Vec<String>],
) -> Result<Vec<f64>> {
    check_shapes(hypotheses, references)?;
    let scores = hypotheses
        .iter()
        .zip(references)
        .map(|(hyp, refs)| {
            let hyp_tokens = eval_tokens(hyp);
            let best = refs
                .iter()
                .map(|r| {
                    let ref_tokens = eval_tokens(r);
                    let lcs = lcs_len(&hyp_tokens, &ref_tokens);
                    f_score(lcs, hyp_tokens.len(), ref_tokens.len())
                })
                .fold(0.0f64, f64::max);
            100.0 * best
        })
        .collect();
    Ok(scores)
}

/// Mean ROUGE-L F-score over the corpus, 0–100.
pub fn rouge_l(hypotheses: &[String], references: &[Vec<String>]) -> Result<f64> {
    let per_instance = rouge_l_per_instance(hypotheses, references)?;
    Ok(per_instance.iter().sum::<f64>() / per_instance.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn owned(texts: &[&str]) -> Vec<String> {
        texts.iter().map(|t| t.to_string()).collect()
    }

    /// Reference LCS by exhaustive subsequence enumeration: every subsequence
    /// of `a` (selected by bitmask) is tested for being a subsequence of `b`.
    fn lcs_brute(a: &[u8], b: &[u8]) -> usize {
        let mut best = 0;
        for mask in 0u32..(1u32 << a.len()) {
            let picked: Vec<u8> = a
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &c)| c)
                .collect();
            if picked.len() > best && is_subsequence(&picked, b) {
                best = picked.len();
            }
        }
        best
    }

    fn is_subsequence(needle: &[u8], haystack: &[u8]) -> bool {
        let mut it = haystack.iter();
        needle.iter().all(|n| it.any(|h| h == n))
    }

    /// All byte strings over {a, b} with length at most `max_len`.
    fn all_strings(max_len: usize) -> Vec<Vec<u8>> {
        let mut out = vec![vec![]];
        let mut frontier = vec![vec![]];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for s in &frontier {
                for c in [b'a', b'b'] {
                    let mut t = s.clone();
                    t.push(c);
                    next.push(t);
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }

    #[test]
    fn lcs_matches_brute_force_on_all_short_binary_strings() {
        let strings = all_strings(7);
        let mut checked = 0usize;
        for a in &strings {
            for b in &strings {
                assert_eq!(
                    lcs_len(a, b),
                    lcs_brute(a, b),
                    "lcs mismatch for {a:?} vs {b:?}"
                );
                checked += 1;
            }
        }
        assert_eq!(checked, 255 * 255);
    }

    #[test]
    fn swapped_bigram_scores_fifty() {
        // "a b" vs "b a": the LCS is one token, P = R = 1/2, and an F-score of
        // exactly 1/2 regardless of beta because P equals R.
        let score = rouge_l(&owned(&["a b"]), &[owned(&["b a"])]).unwrap();
        assert_relative_eq!(score, 50.0, epsilon = 1e-12);
    }

    #[test]
    fn identical_text_scores_one_hundred() {
        let score = rouge_l(
            &owned(&["the cat sat on the mat ."]),
            &[owned(&["the cat sat on the mat ."])],
        )
        .unwrap();
        assert_relative_eq!(score, 100.0, epsilon = 1e-12);
    }

    #[test]
    fn unbalanced_precision_recall_matches_hand_computation() {
        // Hypothesis "a b c d" vs reference "a b": LCS = 2, P = 1/2, R = 1,
        // F = (1 + 1.44)·0.5·1 / (1 + 1.44·0.5) = 1.22/1.72.
        let score = rouge_l(&owned(&["a b c d"]), &[owned(&["a b"])]).unwrap();
        assert_relative_eq!(score, 100.0 * 1.22 / 1.72, epsilon = 1e-9);
    }

    #[test]
    fn best_reference_wins() {
        let score = rouge_l(
            &owned(&["a b c"]),
            &[owned(&["z z z z", "a b c", "a z c"])],
        )
        .unwrap();
        assert_relative_eq!(score, 100.0, epsilon = 1e-12);
    }

    #[test]
    fn corpus_score_is_the_instance_mean() {
        let hyps = owned(&["a b", "a b"]);
        let refs = vec![owned(&["a b"]), owned(&["b a"])];
        let per = rouge_l_per_instance(&hyps, &refs).unwrap();
        assert_relative_eq!(per[0], 100.0, epsilon = 1e-12);
        assert_relative_eq!(per[1], 50.0, epsilon = 1e-12);
        assert_relative_eq!(rouge_l(&hyps, &refs).unwrap(), 75.0, epsilon = 1e-12);
    }

    #[test]
    fn f_score_lies_between_precision_and_recall() {
        // Exhaustive sweep over short binary strings: whenever the LCS is
        // nonzero, F must lie within [min(P, R), max(P, R)].
        let strings = all_strings(5);
        for a in &strings {
            for b in &strings {
                if a.is_empty() || b.is_empty() {
                    continue;
                }
                let lcs = lcs_len(a, b);
                if lcs == 0 {
                    continue;
                }
                let p = lcs as f64 / a.len() as f64;
                let r = lcs as f64 / b.len() as f64;
                let f = f_score(lcs, a.len(), b.len());
                assert!(
                    f >= p.min(r) - 1e-12 && f <= p.max(r) + 1e-12,
                    "F {f} outside [{}, {}] for {a:?} vs {b:?}",
                    p.min(r),
                    p.max(r)
                );
            }
        }
    }

    #[test]
    fn disjoint_text_scores_zero() {
        let score = rouge_l(&owned(&["x y z"]), &[owned(&["a b c"])]).unwrap();
        assert_eq!(score, 0.0);
    }

    #[test]
    fn shape_violations_are_contract_errors() {
        assert!(matches!(
            rouge_l(&[], &[vec!["a".to_string()]]),
            Err(Error::Contract(_))
        ));
        assert!(matches!(
            rouge_l(&owned(&["a"]), &[]),
            Err(Error::Contract(_))
        ));
        assert!(matches!(
            rouge_l(&owned(&["a"]), &[vec![]]),
            Err(Error::Contract(_))
        ));
    }
}
