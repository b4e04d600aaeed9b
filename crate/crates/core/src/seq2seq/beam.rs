//! Beam search over any step scorer, plus the adapter that drives it from a
//! trained model.
//!
//! The search is deterministic: candidates are ranked by accumulated
//! log-probability, ties broken by lexicographically smaller token sequence,
//! then by earlier finish. No length normalization is applied.

use std::cmp::Ordering;

use crate::corpus::vocab::EOS;
use crate::error::{Error, Result};
use crate::seq2seq::infer::{decode_step, encode, DecoderState, Encoded};
use crate::seq2seq::model::Model;

/// One decode-step provider. `step` returns the log-probability of every
/// next symbol together with the advanced state; all successors of a
/// hypothesis share that state except for the emitted symbol, which the
/// search records via `choose`.
pub trait BeamScorer {
    type State: Clone;
    fn start(&self) -> Result<Self::State>;
    fn step(&self, state: &Self::State) -> Result<(Vec<f64>, Self::State)>;
    fn choose(&self, state: &mut Self::State, token: usize);
}

/// A (possibly finished) decoded candidate. `tokens` never contains EOS;
/// `log_prob` includes the EOS step for finished hypotheses.
#[derive(Clone, Debug)]
pub struct Hypothesis<S> {
    pub tokens: Vec<usize>,
    pub log_prob: f64,
    pub finished: bool,
    pub state: S,
    /// Step (1-based) at which EOS was emitted; `None` while unfinished.
    pub finish_step: Option<usize>,
}

/// Standard beam search. Each step expands every live hypothesis over the
/// full vocabulary and keeps the `beam_size` best extensions; extensions
/// emitting `eos` retire into the result pool and are never extended again.
/// The search stops when no live hypotheses remain or after `max_len` steps,
/// at which point still-live hypotheses join the pool unfinished. Returns up
/// to `beam_size` hypotheses, best first.
pub fn beam_search<Sc: BeamScorer>(
    scorer: &Sc,
    beam_size: usize,
    max_len: usize,
    eos: usize,
) -> Result<Vec<Hypothesis<Sc::State>>> {
    if beam_size == 0 || max_len == 0 {
        return Err(Error::contract(format!(
            "beam_search: beam_size {beam_size} and max_len {max_len} must be at least 1"
        )));
    }
    let mut live = vec![Hypothesis {
        tokens: Vec::new(),
        log_prob: 0.0,
        finished: false,
        state: scorer.start()?,
        finish_step: None,
    }];
    let mut pool: Vec<Hypothesis<Sc::State>> = Vec::new();

    for step in 1..=max_len {
        struct Candidate {
            parent: usize,
            token: usize,
            log_prob: f64,
        }
        let mut advanced: Vec<Sc::State> = Vec::with_capacity(live.len());
        let mut candidates: Vec<Candidate> = Vec::new();
        for (parent, hyp) in live.iter().enumerate() {
            let (log_probs, state) = scorer.step(&hyp.state)?;
            advanced.push(state);
            candidates.extend(log_probs.iter().enumerate().map(|(token, lp)| Candidate {
                parent,
                token,
                log_prob: hyp.log_prob + lp,
            }));
        }
        candidates.sort_unstable_by(|a, b| {
            b.log_prob.total_cmp(&a.log_prob).then_with(|| {
                let a_seq = live[a.parent].tokens.iter().chain(std::iter::once(&a.token));
                let b_seq = live[b.parent].tokens.iter().chain(std::iter::once(&b.token));
                a_seq.cmp(b_seq)
            })
        });
        candidates.truncate(beam_size);

        let mut next_live = Vec::with_capacity(candidates.len());
        for cand in candidates {
            let mut state = advanced[cand.parent].clone();
            scorer.choose(&mut state, cand.token);
            let tokens = live[cand.parent].tokens.clone();
            if cand.token == eos {
                pool.push(Hypothesis {
                    tokens,
                    log_prob: cand.log_prob,
                    finished: true,
                    state,
                    finish_step: Some(step),
                });
            } else {
                let mut tokens = tokens;
                tokens.push(cand.token);
                next_live.push(Hypothesis {
                    tokens,
                    log_prob: cand.log_prob,
                    finished: false,
                    state,
                    finish_step: None,
                });
            }
        }
        live = next_live;
        if live.is_empty() {
            break;
        }
    }
    pool.extend(live);
    pool.sort_by(rank_order);
    pool.truncate(beam_size);
    Ok(pool)
}

/// Final ranking: log-probability descending, then lexicographically smaller
/// token sequence, then earlier finish.
pub(crate) fn rank_order<S>(a: &Hypothesis<S>, b: &Hypothesis<S>) -> Ordering {
    b.log_prob
        .total_cmp(&a.log_prob)
        .then_with(|| a.tokens.cmp(&b.tokens))
        .then_with(|| {
            let fa = a.finish_step.unwrap_or(usize::MAX);
            let fb = b.finish_step.unwrap_or(usize::MAX);
            fa.cmp(&fb)
        })
}

/// Drives beam search from a trained model for one encoded input.
pub struct ModelScorer<'a> {
    model: &'a Model,
    encoded: Encoded,
}

impl<'a> ModelScorer<'a> {
    pub fn new(model: &'a Model, input: &[usize]) -> Result<Self> {
        Ok(ModelScorer {
            model,
            encoded: encode(model, input)?,
        })
    }
}

impl BeamScorer for ModelScorer<'_> {
    type State = DecoderState;

    fn start(&self) -> Result<DecoderState> {
        Ok(self.encoded.initial_state.clone())
    }

    fn step(&self, state: &DecoderState) -> Result<(Vec<f64>, DecoderState)> {
        let out = decode_step(self.model, &self.encoded.annotations, state)?;
        Ok((out.log_probs.into_data(), out.state))
    }

    fn choose(&self, state: &mut DecoderState, token: usize) {
        state.prev_token = token;
    }
}

/// Beam-decode one input with a model: token ids in, ranked hypotheses out.
pub fn beam_decode(
    model: &Model,
    input: &[usize],
    beam_size: usize,
    max_len: usize,
) -> Result<Vec<Hypothesis<DecoderState>>> {
    let scorer = ModelScorer::new(model, input)?;
    beam_search(&scorer, beam_size, max_len, EOS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq2seq::infer::greedy_decode;
    use crate::seq2seq::model::test_support::tiny_model;
    use approx::assert_abs_diff_eq;

    /// Toy scorer over a 4-symbol alphabet {0=eos, 1, 2, 3} whose next-symbol
    /// distribution depends only on the last emitted symbol.
    struct TableScorer {
        /// Row `s`: log-probs of emitting each symbol after symbol `s`
        /// (row 0 = sequence start).
        rows: Vec<Vec<f64>>,
    }

    impl TableScorer {
        fn from_probs(rows: &[[f64; 4]]) -> Self {
            for row in rows {
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
            TableScorer {
                rows: rows
                    .iter()
                    .map(|r| r.iter().map(|&p| p.ln()).collect())
                    .collect(),
            }
        }

        fn row_for(&self, state: &[usize]) -> usize {
            state.last().map_or(0, |&t| t)
        }
    }

    impl BeamScorer for TableScorer {
        type State = Vec<usize>;

        fn start(&self) -> Result<Vec<usize>> {
            Ok(Vec::new())
        }

        fn step(&self, state: &Vec<usize>) -> Result<(Vec<f64>, Vec<usize>)> {
            Ok((self.rows[self.row_for(state)].clone(), state.clone()))
        }

        fn choose(&self, state: &mut Vec<usize>, token: usize) {
            state.push(token);
        }
    }

    /// Exhaustively enumerate every outcome the search semantics admit:
    /// finished sequences (content + eos within `max_len` steps) and
    /// unfinished sequences of exactly `max_len` content symbols.
    fn enumerate_outcomes(scorer: &TableScorer, max_len: usize) -> Vec<Hypothesis<Vec<usize>>> {
        let mut out = Vec::new();
        let mut stack: Vec<(Vec<usize>, f64)> = vec![(Vec::new(), 0.0)];
        while let Some((prefix, lp)) = stack.pop() {
            let row = &scorer.rows[scorer.row_for(&prefix)];
            if prefix.len() == max_len {
                out.push(Hypothesis {
                    tokens: prefix,
                    log_prob: lp,
                    finished: false,
                    state: Vec::new(),
                    finish_step: None,
                });
                continue;
            }
            for (tok, &tok_lp) in row.iter().enumerate() {
                if tok == 0 {
                    out.push(Hypothesis {
                        tokens: prefix.clone(),
                        log_prob: lp + tok_lp,
                        finished: true,
                        state: Vec::new(),
                        finish_step: Some(prefix.len() + 1),
                    });
                } else {
                    let mut next = prefix.clone();
                    next.push(tok);
                    stack.push((next, lp + tok_lp));
                }
            }
        }
        out.sort_by(rank_order);
        out
    }

    fn biased_table() -> TableScorer {
        TableScorer::from_probs(&[
            [0.05, 0.5, 0.3, 0.15],
            [0.4, 0.1, 0.3, 0.2],
            [0.25, 0.25, 0.25, 0.25],
            [0.7, 0.1, 0.1, 0.1],
        ])
    }

    #[test]
    fn wide_beam_reproduces_exhaustive_enumeration() {
        let scorer = biased_table();
        let max_len = 4;
        let oracle = enumerate_outcomes(&scorer, max_len);
        let beam = beam_search(&scorer, oracle.len(), max_len, 0).unwrap();
        assert_eq!(beam.len(), oracle.len());
        for (got, want) in beam.iter().zip(&oracle) {
            assert_eq!(got.tokens, want.tokens);
            assert_abs_diff_eq!(got.log_prob, want.log_prob, epsilon = 1e-12);
            assert_eq!(got.finished, want.finished);
        }
    }

    #[test]
    fn narrow_beam_top_hit_is_within_oracle_top_b() {
        let scorer = biased_table();
        let max_len = 4;
        let oracle = enumerate_outcomes(&scorer, max_len);
        for beam_size in 1..=6 {
            let beam = beam_search(&scorer, beam_size, max_len, 0).unwrap();
            assert!(!beam.is_empty());
            let top_b: Vec<&Vec<usize>> =
                oracle.iter().take(beam_size).map(|h| &h.tokens).collect();
            assert!(
                top_b.contains(&&beam[0].tokens),
                "beam {beam_size}: top-1 {:?} outside oracle top-{beam_size}",
                beam[0].tokens
            );
        }
    }

    #[test]
    fn log_probs_are_nonincreasing_in_rank_and_over_time() {
        let scorer = biased_table();
        let beam = beam_search(&scorer, 8, 5, 0).unwrap();
        for pair in beam.windows(2) {
            assert!(pair[0].log_prob >= pair[1].log_prob);
        }
        for h in &beam {
            assert!(h.log_prob <= 1e-12);
        }
    }

    #[test]
    fn exact_ties_prefer_lower_token_ids() {
        // Symbols 1 and 2 are equally likely, then eos is forced; the two
        // single-symbol sequences tie and must come out id-ordered.
        let scorer = TableScorer::from_probs(&[
            [0.0, 0.5, 0.5, 0.0],
            [1.0, 0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
        ]);
        let beam = beam_search(&scorer, 4, 3, 0).unwrap();
        assert_eq!(beam[0].tokens, vec![1]);
        assert_eq!(beam[1].tokens, vec![2]);
        assert_abs_diff_eq!(beam[0].log_prob, beam[1].log_prob, epsilon = 1e-15);
        assert!(beam[0].finished && beam[1].finished);
    }

    #[test]
    fn beam_one_equals_greedy_on_a_model() {
        for seed in [3u64, 17, 88] {
            let m = tiny_model(seed % 2 == 0, 1 + (seed as usize % 2), seed);
            let input = vec![4usize, 6];
            let greedy = greedy_decode(&m, &input, 6).unwrap();
            let beam = beam_decode(&m, &input, 1, 6).unwrap();
            assert_eq!(beam.len(), 1);
            assert_eq!(beam[0].tokens, greedy, "seed {seed}");
        }
    }

    #[test]
    fn finished_hypotheses_are_never_extended() {
        // Once eos is by far the best continuation, the retired sequence
        // must survive unchanged even with more search steps available.
        let scorer = TableScorer::from_probs(&[
            [0.0, 0.9, 0.05, 0.05],
            [0.98, 0.0, 0.01, 0.01],
            [0.5, 0.1, 0.2, 0.2],
            [0.5, 0.1, 0.2, 0.2],
        ]);
        let beam = beam_search(&scorer, 3, 10, 0).unwrap();
        assert_eq!(beam[0].tokens, vec![1]);
        assert!(beam[0].finished);
        assert_eq!(beam[0].finish_step, Some(2));
    }

    #[test]
    fn zero_beam_or_zero_len_is_a_contract_error() {
        let scorer = biased_table();
        assert!(beam_search(&scorer, 0, 5, 0).is_err());
        assert!(beam_search(&scorer, 5, 0, 0).is_err());
    }

    #[test]
    fn returns_at_most_beam_size_results() {
        let scorer = biased_table();
        for beam_size in [1usize, 2, 3, 7] {
            let beam = beam_search(&scorer, beam_size, 4, 0).unwrap();
            assert!(beam.len() <= beam_size);
        }
    }
}
