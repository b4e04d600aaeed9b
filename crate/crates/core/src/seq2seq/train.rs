//! Training loop: seeded shuffling, padded mini-batches, gradient clipping,
//! the halving learning-rate schedule, and perplexity-based checkpoint
//! selection. Given the same seed, corpus, schedule, and config, two runs
//! produce bit-identical results.

use crate::autodiff::Graph;
use crate::corpus::vocab::{Vocabulary, EOS};
use crate::corpus::Instance;
use crate::error::{Error, Result};
use crate::optim::{clip_global_norm, optimizer_step, OptimizerKind, OptimizerState};
use crate::rng::{SeededPrng, Stream};
use crate::seq2seq::config::TrainingSchedule;
use crate::seq2seq::forward::forward_batch;
use crate::seq2seq::infer::score_reference;
use crate::seq2seq::model::Model;

/// One id-encoded training pair: input ids, and reference content ids
/// followed by EOS.
pub type EncodedPair = (Vec<usize>, Vec<usize>);

/// What happened in one training epoch.
#[derive(Clone, Debug)]
pub struct EpochLog {
    /// 1-based epoch number.
    pub epoch: usize,
    /// Token-mean training NLL over the epoch (dropout active).
    pub train_loss: f64,
    pub dev_perplexity: f64,
    /// Learning rate in force during this epoch.
    pub learning_rate: f64,
    /// Whether dev perplexity improved on the best seen so far.
    pub improved: bool,
    /// Whether the learning rate was halved at the end of this epoch.
    pub halved: bool,
}

/// The selected checkpoint and the full training trace.
#[derive(Clone, Debug)]
pub struct TrainOutcome {
    /// Model carrying the parameters with the lowest dev perplexity seen.
    pub model: Model,
    /// Epoch that produced the kept parameters; 0 means no epoch improved
    /// on the untrained baseline.
    pub best_epoch: usize,
    pub best_dev_perplexity: f64,
    /// Dev perplexity of the untrained model.
    pub baseline_dev_perplexity: f64,
    pub log: Vec<EpochLog>,
}

/// Tokenize and id-encode instances against the two vocabularies, mapping
/// unknown symbols to UNK and terminating each reference with EOS.
pub fn encode_pairs(
    instances: &[Instance],
    input_vocab: &Vocabulary,
    output_vocab: &Vocabulary,
) -> Result<Vec<EncodedPair>> {
    if input_vocab.mode() != output_vocab.mode() {
        return Err(Error::contract(format!(
            "vocabulary modes differ: {:?} vs {:?}",
            input_vocab.mode(),
            output_vocab.mode()
        )));
    }
    let mode = input_vocab.mode();
    instances
        .iter()
        .enumerate()
        .map(|(i, inst)| {
            let input_tokens = crate::corpus::tokenize::tokenize(&inst.input, mode);
            if input_tokens.is_empty() {
                return Err(Error::data(format!(
                    "instance {i}: input tokenizes to nothing"
                )));
            }
            let mut target = output_vocab.encode(&crate::corpus::tokenize::tokenize(
                &inst.reference,
                mode,
            ));
            target.push(EOS);
            Ok((input_vocab.encode(&input_tokens), target))
        })
        .collect()
}

/// Corpus perplexity: `exp` of the token-mean negative log-likelihood over
/// every reference position (EOS included).
pub fn perplexity(model: &Model, pairs: &[EncodedPair]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::contract("perplexity: empty corpus"));
    }
    let mut total_nll = 0.0;
    let mut positions = 0.0;
    for (input, target) in pairs {
        total_nll += score_reference(model, input, target)?;
        positions += target.len() as f64;
    }
    Ok((total_nll / positions).exp())
}

/// Train a copy of `model` on `train_pairs`, evaluating `dev_pairs` each
/// epoch. The learning rate is halved at the end of any epoch without a dev
/// improvement and unconditionally from `lr_halve_from_epoch` onward; the
/// returned model carries the parameters of the best dev evaluation
/// (the untrained baseline included). A non-finite batch loss aborts with a
/// divergence error naming the epoch and batch.
pub fn train(
    model: &Model,
    train_pairs: &[EncodedPair],
    dev_pairs: &[EncodedPair],
    schedule: &TrainingSchedule,
    seed: u64,
) -> Result<TrainOutcome> {
    schedule.validate()?;
    model.config.validate()?;
    if train_pairs.is_empty() || dev_pairs.is_empty() {
        return Err(Error::contract(format!(
            "train: {} training pairs, {} dev pairs; both must be non-empty",
            train_pairs.len(),
            dev_pairs.len()
        )));
    }

    let mut work = model.clone();
    let mut shuffle_rng = SeededPrng::new(seed, Stream::Shuffle);
    let mut dropout_rng = SeededPrng::new(seed, Stream::Dropout);
    let mut opt = match schedule.optimizer {
        OptimizerKind::Sgd => OptimizerState::sgd(schedule.learning_rate),
        OptimizerKind::Adam => OptimizerState::adam(schedule.learning_rate),
    };

    let baseline = perplexity(&work, dev_pairs)?;
    let mut best_ppl = baseline;
    let mut best_epoch = 0usize;
    let mut best_params = work.params.clone();

    let mut order: Vec<usize> = (0..train_pairs.len()).collect();
    let mut log = Vec::with_capacity(schedule.max_epochs);
    for epoch in 1..=schedule.max_epochs {
        shuffle_rng.shuffle(&mut order);
        let mut epoch_nll = 0.0;
        let mut epoch_positions = 0.0;
        for (batch_index, chunk) in order.chunks(schedule.batch_size).enumerate() {
            let inputs: Vec<Vec<usize>> =
                chunk.iter().map(|&i| train_pairs[i].0.clone()).collect();
            let targets: Vec<Vec<usize>> =
                chunk.iter().map(|&i| train_pairs[i].1.clone()).collect();
            let mut g = Graph::new();
            let fb = forward_batch(&mut g, &work, &inputs, &targets, Some(&mut dropout_rng))?;
            let loss = g.value(fb.loss).scalar_value()?;
            if !loss.is_finite() {
                return Err(Error::Divergence {
                    epoch,
                    batch: batch_index + 1,
                });
            }
            epoch_nll += loss * fb.scored_positions;
            epoch_positions += fb.scored_positions;

            let mut grads = work.params.zeros_like();
            g.backward(fb.loss, &mut grads)?;
            clip_global_norm(&mut grads, schedule.clip_max_norm)?;
            optimizer_step(&mut work.params, &grads, &mut opt)?;
        }

        let dev_ppl = perplexity(&work, dev_pairs)?;
        let improved = dev_ppl < best_ppl;
        if improved {
            best_ppl = dev_ppl;
            best_epoch = epoch;
            best_params = work.params.clone();
        }
        let halved = !improved || epoch >= schedule.lr_halve_from_epoch;
        let learning_rate = opt.learning_rate;
        if halved {
            opt.halve_learning_rate();
        }
        log.push(EpochLog {
            epoch,
            train_loss: epoch_nll / epoch_positions,
            dev_perplexity: dev_ppl,
            learning_rate,
            improved,
            halved,
        });
    }

    work.params = best_params;
    Ok(TrainOutcome {
        model: work,
        best_epoch,
        best_dev_perplexity: best_ppl,
        baseline_dev_perplexity: baseline,
        log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize::TokenMode;
    use crate::seq2seq::config::ModelConfig;
    use crate::seq2seq::forward::teacher_forced_loss;
    use crate::seq2seq::infer::greedy_decode;
    use crate::seq2seq::model::test_support::{letter_vocab, tiny_model};
    use approx::assert_abs_diff_eq;

    fn schedule(optimizer: OptimizerKind, lr: f64, epochs: usize, halve_from: usize) -> TrainingSchedule {
        TrainingSchedule {
            optimizer,
            learning_rate: lr,
            max_epochs: epochs,
            lr_halve_from_epoch: halve_from,
            clip_max_norm: 5.0,
            batch_size: 2,
        }
    }

    fn toy_pairs() -> Vec<EncodedPair> {
        vec![
            (vec![4, 5], vec![4, EOS]),
            (vec![5, 6], vec![5, 4, EOS]),
            (vec![6, 4, 7], vec![6, EOS]),
        ]
    }

    /// Small model that can still separate decode steps through attention:
    /// the output layer reads only the attention context, so memorizing a
    /// sequence forces the attention weights themselves to differentiate.
    fn overfit_model(seed: u64) -> Model {
        let config = ModelConfig {
            mode: TokenMode::Word,
            embedding_dim: 8,
            hidden_dim: 16,
            num_layers: 1,
            bidirectional_encoder: false,
            dropout_p: 0.0,
        };
        Model::new(
            config,
            letter_vocab(TokenMode::Word, 6),
            letter_vocab(TokenMode::Word, 6),
            seed,
        )
        .unwrap()
    }

    #[test]
    fn training_is_bit_reproducible() {
        // Dropout on: the training seed must drive both the shuffle and the
        // dropout masks, and identical seeds must replay both exactly.
        let mut m = tiny_model(true, 2, 44);
        m.config.dropout_p = 0.2;
        let pairs = toy_pairs();
        let sched = schedule(OptimizerKind::Adam, 0.01, 3, 8);
        let a = train(&m, &pairs, &pairs, &sched, 99).unwrap();
        let b = train(&m, &pairs, &pairs, &sched, 99).unwrap();
        for (la, lb) in a.log.iter().zip(&b.log) {
            assert_eq!(la.train_loss.to_bits(), lb.train_loss.to_bits());
            assert_eq!(la.dev_perplexity.to_bits(), lb.dev_perplexity.to_bits());
        }
        for (name, t) in a.model.params.iter() {
            let u = b.model.params.get(name).unwrap();
            for (x, y) in t.data().iter().zip(u.data()) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
        // A different seed takes a different path.
        let c = train(&m, &pairs, &pairs, &sched, 100).unwrap();
        assert_ne!(
            a.log[0].train_loss.to_bits(),
            c.log[0].train_loss.to_bits()
        );
    }

    #[test]
    fn single_pair_memorization_reproduces_reference() {
        // Frozen at a seed whose dev perplexity improves every epoch, since a
        // single stalled epoch halves the learning rate and a tiny model then
        // never recovers (the halving rule is exercised separately below).
        let m = overfit_model(2);
        let pairs = vec![(vec![4, 5, 6], vec![5, EOS])];
        let sched = TrainingSchedule {
            optimizer: OptimizerKind::Adam,
            learning_rate: 0.02,
            max_epochs: 400,
            lr_halve_from_epoch: 401,
            clip_max_norm: 5.0,
            batch_size: 1,
        };
        let out = train(&m, &pairs, &pairs, &sched, 7).unwrap();
        let decoded = greedy_decode(&out.model, &pairs[0].0, 10).unwrap();
        assert_eq!(decoded, vec![5]);
        let ppl = perplexity(&out.model, &pairs).unwrap();
        assert!(ppl < 1.01, "perplexity {ppl}");
        assert!(ppl >= 1.0);
        // The kept checkpoint is the best evaluation seen.
        let min_logged = out
            .log
            .iter()
            .map(|l| l.dev_perplexity)
            .fold(out.baseline_dev_perplexity, f64::min);
        assert_eq!(out.best_dev_perplexity, min_logged);
    }

    #[test]
    fn five_hundred_raw_steps_overfit_one_pair() {
        let m = overfit_model(1);
        let input = vec![4usize, 5, 6];
        let target = vec![5usize, EOS];
        let mut work = m.clone();
        let mut opt = OptimizerState::adam(0.02);
        let mut losses = Vec::with_capacity(500);
        for _ in 0..500 {
            let mut g = Graph::new();
            let fb = forward_batch(
                &mut g,
                &work,
                std::slice::from_ref(&input),
                std::slice::from_ref(&target),
                None,
            )
            .unwrap();
            losses.push(g.value(fb.loss).scalar_value().unwrap());
            let mut grads = work.params.zeros_like();
            g.backward(fb.loss, &mut grads).unwrap();
            clip_global_norm(&mut grads, 5.0).unwrap();
            optimizer_step(&mut work.params, &grads, &mut opt).unwrap();
        }
        let final_loss = teacher_forced_loss(&work, &input, &target).unwrap();
        assert!(final_loss < 0.01, "loss after 500 steps: {final_loss}");
        // Near-monotonic decrease over the first 50 steps (5% headroom).
        for w in losses[..50].windows(2) {
            assert!(
                w[1] <= w[0] * 1.05,
                "loss rose beyond noise: {} -> {}",
                w[0],
                w[1]
            );
        }
    }

    #[test]
    fn learning_rate_halves_every_epoch_without_improvement() {
        // Dev overwhelmingly wants the one symbol the training pair drives
        // probability away from (five positions of `5` against one shared
        // end-of-sequence), so dev perplexity only degrades as training
        // proceeds and the baseline evaluation stays the best seen.
        let m = tiny_model(false, 1, 2);
        let train_pairs = vec![(vec![4, 5], vec![4, EOS])];
        let dev_pairs = vec![(vec![4, 5], vec![5, 5, 5, 5, 5, EOS])];
        let sched = TrainingSchedule {
            optimizer: OptimizerKind::Sgd,
            learning_rate: 1.0,
            max_epochs: 13,
            lr_halve_from_epoch: 8,
            clip_max_norm: 5.0,
            batch_size: 1,
        };
        let out = train(&m, &train_pairs, &dev_pairs, &sched, 3).unwrap();
        assert_eq!(out.best_epoch, 0);
        assert_eq!(out.best_dev_perplexity, out.baseline_dev_perplexity);
        for (i, l) in out.log.iter().enumerate() {
            assert!(!l.improved, "epoch {} unexpectedly improved", l.epoch);
            assert!(l.halved);
            // Halving at the end of every epoch: epoch e ran at lr/2^(e-1).
            assert_eq!(l.learning_rate, 1.0 / f64::powi(2.0, i as i32));
        }
    }

    #[test]
    fn halving_is_unconditional_from_the_given_epoch() {
        let m = tiny_model(false, 1, 6);
        let pairs = toy_pairs();
        let sched = schedule(OptimizerKind::Sgd, 0.5, 5, 3);
        let out = train(&m, &pairs, &pairs, &sched, 1).unwrap();
        for l in &out.log {
            if l.epoch >= 3 {
                assert!(l.halved, "epoch {} did not halve", l.epoch);
            } else {
                assert_eq!(l.halved, !l.improved);
            }
        }
    }

    #[test]
    fn uniform_model_perplexity_is_vocabulary_size() {
        let mut m = tiny_model(false, 1, 1);
        m.params.zero_all();
        let pairs = toy_pairs();
        let ppl = perplexity(&m, &pairs).unwrap();
        assert_abs_diff_eq!(ppl, m.output_vocab.len() as f64, epsilon = 1e-6);
    }

    #[test]
    fn perplexity_is_at_least_one() {
        let pairs = toy_pairs();
        for seed in 0..5 {
            let m = tiny_model(seed % 2 == 0, 1, seed);
            assert!(perplexity(&m, &pairs).unwrap() >= 1.0);
        }
    }

    #[test]
    fn non_finite_loss_aborts_with_epoch_and_batch() {
        let m = tiny_model(false, 1, 8);
        let mut broken = m.clone();
        broken
            .params
            .get_mut("attn.w")
            .unwrap()
            .data_mut()[0] = f64::NAN;
        let pairs = toy_pairs();
        let sched = schedule(OptimizerKind::Sgd, 0.1, 2, 8);
        match train(&broken, &pairs, &pairs, &sched, 1) {
            Err(Error::Divergence { epoch: 1, batch: 1 }) => {}
            other => panic!("expected divergence at epoch 1 batch 1, got {other:?}"),
        }
    }

    #[test]
    fn empty_corpora_are_contract_errors() {
        let m = tiny_model(false, 1, 1);
        let pairs = toy_pairs();
        let sched = schedule(OptimizerKind::Sgd, 0.1, 1, 8);
        assert!(train(&m, &[], &pairs, &sched, 1).is_err());
        assert!(train(&m, &pairs, &[], &sched, 1).is_err());
        assert!(perplexity(&m, &[]).is_err());
    }

    #[test]
    fn encode_pairs_maps_tokens_and_appends_eos() {
        let input_vocab = Vocabulary::build(
            TokenMode::Word,
            [vec!["name", "is", "NAME"]].iter().map(|v| v.iter().copied()),
        )
        .unwrap();
        let output_vocab = Vocabulary::build(
            TokenMode::Word,
            [vec!["NAME", "is", "here", "."]].iter().map(|v| v.iter().copied()),
        )
        .unwrap();
        let instances = vec![Instance {
            input: "name is NAME".to_string(),
            reference: "NAME is unseen .".to_string(),
            delex: Default::default(),
        }];
        let pairs = encode_pairs(&instances, &input_vocab, &output_vocab).unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].0, vec![4, 5, 6]);
        // "unseen" is out of vocabulary; the reference ends with EOS.
        let unk = crate::corpus::vocab::UNK;
        assert_eq!(pairs[0].1, vec![4, 5, unk, 7, EOS]);

        let empty = vec![Instance {
            input: "   ".to_string(),
            reference: "x".to_string(),
            delex: Default::default(),
        }];
        assert!(encode_pairs(&empty, &input_vocab, &output_vocab).is_err());
    }
}
