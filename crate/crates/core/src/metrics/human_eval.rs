//! Scoring the references against each other: how well would a human do?
//!
//! With several references per instance, each reference can play the role of
//! a system output and be scored against the remaining ones. Fold `k` uses
//! reference `k` of every instance that has one as the hypothesis; instances
//! with fewer references simply sit out that fold. The per-fold corpus
//! scores are then averaged, giving a reference-quality baseline that
//! generated text can be compared against.
//!
//! Because a real system is scored against *all* references while each
//! fold's pseudo-system is scored against one fewer, [`drop_one_reference`]
//! can remove one randomly chosen reference per instance from the system's
//! evaluation set to make the comparison fair.

use crate::error::{Error, Result};
use crate::rng::{SeededPrng, Stream};

use super::{corpus_bleu, rouge_l};

/// Corpus scores of one leave-one-out fold.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldScore {
    /// Which reference index played the hypothesis role.
    pub fold: usize,
    /// How many instances had a reference at that index.
    pub instances: usize,
    /// Corpus BLEU of the fold, 0–100.
    pub bleu: f64,
    /// Mean ROUGE-L of the fold, 0–100.
    pub rouge_l: f64,
}

/// Aggregate of all leave-one-out folds.
#[derive(Debug, Clone, PartialEq)]
pub struct HumanEvalReport {
    /// One entry per reference index, in order.
    pub folds: Vec<FoldScore>,
    /// Mean corpus BLEU over folds.
    pub bleu_mean: f64,
    /// Population standard deviation of corpus BLEU over folds.
    pub bleu_sd: f64,
    /// Mean ROUGE-L over folds.
    pub rouge_mean: f64,
    /// Population standard deviation of ROUGE-L over folds.
    pub rouge_sd: f64,
    /// Instances dropped because they had fewer than two references.
    pub excluded_single_reference: usize,
}

fn mean_and_population_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Score each reference against the remaining references of its instance.
///
/// Instances with fewer than two references cannot take part and are
/// excluded (their count is reported). Errors if no instance has at least
/// two references.
pub fn leave_one_out_human_eval(references: &[Vec<String>]) -> Result<HumanEvalReport> {
    let usable: Vec<&Vec<String>> = references.iter().filter(|r| r.len() >= 2).collect();
    let excluded = references.len() - usable.len();
    if usable.is_empty() {
        return Err(Error::contract(
            "leave_one_out_human_eval: no instance has at least two references",
        ));
    }

    let num_folds = usable.iter().map(|r| r.len()).max().expect("nonempty");
    let mut folds = Vec::with_capacity(num_folds);
    for k in 0..num_folds {
        let mut hyps = Vec::new();
        let mut refs = Vec::new();
        for inst in &usable {
            if k < inst.len() {
                hyps.push(inst[k].clone());
                let rest: Vec<String> = inst
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != k)
                    .map(|(_, r)| r.clone())
                    .collect();
                refs.push(rest);
            }
        }
        folds.push(FoldScore {
            fold: k,
            instances: hyps.len(),
            bleu: corpus_bleu(&hyps, &refs)?,
            rouge_l: rouge_l(&hyps, &refs)?,
        });
    }

    let bleus: Vec<f64> = folds.iter().map(|f| f.bleu).collect();
    let rouges: Vec<f64> = folds.iter().map(|f| f.rouge_l).collect();
    let (bleu_mean, bleu_sd) = mean_and_population_sd(&bleus);
    let (rouge_mean, rouge_sd) = mean_and_population_sd(&rouges);
    Ok(HumanEvalReport {
        folds,
        bleu_mean,
        bleu_sd,
        rouge_mean,
        rouge_sd,
        excluded_single_reference: excluded,
    })
}

/// Remove one uniformly chosen reference from every instance that has at
/// least two, deterministically in `seed`. Instances with a single reference
/// are returned unchanged (removing it would leave nothing to score
/// against).
pub fn drop_one_reference(references: &[Vec<String>], seed: u64) -> Vec<Vec<String>> {
    let mut rng = SeededPrng::new(seed, Stream::RefDrop);
    references
        .iter()
        .map(|refs| {
            if refs.len() < 2 {
                return refs.clone();
            }
            let drop = rng.below(refs.len());
            refs.iter()
                .enumerate()
                .filter(|(i, _)| *i != drop)
                .map(|(_, r)| r.clone())
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn owned(texts: &[&str]) -> Vec<String> {
        texts.iter().map(|t| t.to_string()).collect()
    }

    #[test]
    fn three_fold_protocol_matches_hand_computation() {
        // Instance A has three references, instance B two, so there are
        // three folds and fold 2 contains only instance A.
        //   fold 0: "m n o p" vs {"m n o p","m n o q"}; "u v w x" vs itself
        //           -> perfect overlap, BLEU 100, ROUGE 100
        //   fold 1: symmetric to fold 0 -> 100 / 100
        //   fold 2: "m n o q" vs {"m n o p","m n o p"}: its only 4-gram is
        //           unmatched, so BLEU 0; LCS 3 gives P = R = 3/4, ROUGE 75.
        let refs = vec![
            owned(&["m n o p", "m n o p", "m n o q"]),
            owned(&["u v w x", "u v w x"]),
        ];
        let report = leave_one_out_human_eval(&refs).unwrap();
        assert_eq!(report.folds.len(), 3);
        assert_eq!(report.excluded_single_reference, 0);
        assert_eq!(
            report.folds.iter().map(|f| f.instances).collect::<Vec<_>>(),
            vec![2, 2, 1]
        );
        for (fold, (bleu, rouge)) in [(100.0, 100.0), (100.0, 100.0), (0.0, 75.0)]
            .into_iter()
            .enumerate()
        {
            assert_relative_eq!(report.folds[fold].bleu, bleu, epsilon = 1e-9);
            assert_relative_eq!(report.folds[fold].rouge_l, rouge, epsilon = 1e-9);
        }
        // Means and population SDs over folds, by hand:
        //   BLEU (100, 100, 0):  mean 200/3, sd 100 * sqrt(2/9)
        //   ROUGE (100, 100, 75): mean 275/3, sd sqrt(3750/27)
        assert_relative_eq!(report.bleu_mean, 200.0 / 3.0, epsilon = 1e-9);
        assert_relative_eq!(report.bleu_sd, 100.0 * (2.0f64 / 9.0).sqrt(), epsilon = 1e-9);
        assert_relative_eq!(report.rouge_mean, 275.0 / 3.0, epsilon = 1e-9);
        assert_relative_eq!(report.rouge_sd, (3750.0f64 / 27.0).sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn single_reference_instances_are_excluded_not_fatal() {
        let refs = vec![
            owned(&["only one"]),
            owned(&["a b", "a b"]),
        ];
        let report = leave_one_out_human_eval(&refs).unwrap();
        assert_eq!(report.excluded_single_reference, 1);
        assert_eq!(report.folds.len(), 2);
        assert_eq!(report.folds[0].instances, 1);
        assert_relative_eq!(report.rouge_mean, 100.0, epsilon = 1e-9);
    }

    #[test]
    fn all_single_reference_is_a_contract_error() {
        let refs = vec![owned(&["a"]), owned(&["b"])];
        assert!(matches!(
            leave_one_out_human_eval(&refs),
            Err(Error::Contract(_))
        ));
        assert!(matches!(
            leave_one_out_human_eval(&[]),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn drop_one_reference_is_seeded_and_removes_exactly_one() {
        let refs = vec![
            owned(&["r0", "r1", "r2"]),
            owned(&["s0"]),
            owned(&["t0", "t1"]),
        ];
        let a = drop_one_reference(&refs, 7);
        let b = drop_one_reference(&refs, 7);
        assert_eq!(a, b, "same seed must drop the same references");
        assert_eq!(a[0].len(), 2);
        assert_eq!(a[1], refs[1], "single-reference instances are untouched");
        assert_eq!(a[2].len(), 1);
        for (kept, original) in a.iter().zip(&refs) {
            for r in kept {
                assert!(original.contains(r), "kept reference must come from the original set");
            }
        }
    }

    #[test]
    fn different_seeds_can_drop_different_references() {
        let refs = vec![owned(&["r0", "r1", "r2"])];
        let mut survivors = std::collections::BTreeSet::new();
        for seed in 0..20 {
            let dropped = drop_one_reference(&refs, seed);
            survivors.insert(dropped[0].clone());
        }
        assert!(
            survivors.len() >= 2,
            "over 20 seeds at least two distinct drop choices should occur"
        );
    }
}
