//! Model assembly: the named-parameter schema, initialization, and the
//! bundle of everything inference needs (config, weights, vocabularies).

use crate::corpus::vocab::Vocabulary;
use crate::error::{Error, Result};
use crate::params::ParameterStore;
use crate::rng::{SeededPrng, Stream};
use crate::seq2seq::config::ModelConfig;

/// The only initialization recipe this crate ships; recorded in checkpoints
/// so a loaded file self-describes how its weights were born.
pub const INIT_SCHEME: &str = "uniform(-0.1,0.1); zero biases";

/// Encoder direction labels, in processing order.
pub(crate) const FORWARD: &str = "fw";
pub(crate) const BACKWARD: &str = "bw";

pub(crate) fn enc_name(layer: usize, dir: &str, part: &str) -> String {
    format!("enc.l{layer}.{dir}.{part}")
}

pub(crate) fn bridge_name(layer: usize, which: &str, part: &str) -> String {
    format!("enc.l{layer}.bridge_{which}.{part}")
}

pub(crate) fn dec_name(layer: usize, part: &str) -> String {
    format!("dec.l{layer}.{part}")
}

/// A complete encoder-decoder model: architecture, weights, and the two
/// vocabularies its token ids refer to.
#[derive(Clone, Debug)]
pub struct Model {
    pub config: ModelConfig,
    pub params: ParameterStore,
    pub input_vocab: Vocabulary,
    pub output_vocab: Vocabulary,
    pub init_scheme: String,
    pub seed: u64,
}

impl Model {
    /// Build a freshly initialized model: weights drawn `U(-0.1, 0.1)` from
    /// the seed's init stream, biases zero.
    pub fn new(
        config: ModelConfig,
        input_vocab: Vocabulary,
        output_vocab: Vocabulary,
        seed: u64,
    ) -> Result<Model> {
        config.validate()?;
        check_vocabs(&config, &input_vocab, &output_vocab)?;
        let mut params = ParameterStore::new();
        for (name, shape) in expected_shapes(&config, input_vocab.len(), output_vocab.len()) {
            params.register(&name, &shape)?;
        }
        let mut rng = SeededPrng::new(seed, Stream::Init);
        params.init_uniform_where(&mut rng, 0.1, |name| {
            !(name.ends_with(".bias") || name.ends_with(".b"))
        });
        Ok(Model {
            config,
            params,
            input_vocab,
            output_vocab,
            init_scheme: INIT_SCHEME.to_string(),
            seed,
        })
    }

    /// Reassemble a model from stored pieces (checkpoint loading), verifying
    /// that the weights exactly match the schema the config implies.
    pub fn from_parts(
        config: ModelConfig,
        params: ParameterStore,
        input_vocab: Vocabulary,
        output_vocab: Vocabulary,
        init_scheme: String,
        seed: u64,
    ) -> Result<Model> {
        config.validate()?;
        check_vocabs(&config, &input_vocab, &output_vocab)?;
        let expected = expected_shapes(&config, input_vocab.len(), output_vocab.len());
        if params.len() != expected.len() {
            return Err(Error::contract(format!(
                "model has {} parameters, schema expects {}",
                params.len(),
                expected.len()
            )));
        }
        for (name, shape) in &expected {
            let got = params.get(name)?;
            if got.shape() != shape.as_slice() {
                return Err(Error::dimension(format!(
                    "parameter {name}: shape {:?}, schema expects {shape:?}",
                    got.shape()
                )));
            }
        }
        Ok(Model {
            config,
            params,
            input_vocab,
            output_vocab,
            init_scheme,
            seed,
        })
    }

}

fn check_vocabs(config: &ModelConfig, input: &Vocabulary, output: &Vocabulary) -> Result<()> {
    if input.mode() != config.mode || output.mode() != config.mode {
        return Err(Error::contract(format!(
            "vocabulary modes ({:?}, {:?}) disagree with model mode {:?}",
            input.mode(),
            output.mode(),
            config.mode
        )));
    }
    Ok(())
}

/// The full parameter schema for a config: `(name, shape)` pairs.
///
/// Encoder and decoder keep separate embedding matrices. Each encoder layer
/// owns one weight set per direction; bidirectional layers add linear bridges
/// that fold the two directions' `2H` concatenation back to `H`, one for
/// hidden states (shared by per-position annotations and the final state) and
/// one for final cell states.
pub fn expected_shapes(config: &ModelConfig, v_in: usize, v_out: usize) -> Vec<(String, Vec<usize>)> {
    let e = config.embedding_dim;
    let h = config.hidden_dim;
    let mut out = vec![
        ("embed.in".to_string(), vec![v_in, e]),
        ("embed.out".to_string(), vec![v_out, e]),
    ];
    let dirs: &[&str] = if config.bidirectional_encoder {
        &[FORWARD, BACKWARD]
    } else {
        &[FORWARD]
    };
    for l in 0..config.num_layers {
        let d_in = if l == 0 { e } else { h };
        for dir in dirs {
            out.push((enc_name(l, dir, "w_ih"), vec![4 * h, d_in]));
            out.push((enc_name(l, dir, "w_hh"), vec![4 * h, h]));
            out.push((enc_name(l, dir, "bias"), vec![4 * h]));
        }
        if config.bidirectional_encoder {
            for which in ["h", "c"] {
                out.push((bridge_name(l, which, "w"), vec![h, 2 * h]));
                out.push((bridge_name(l, which, "b"), vec![h]));
            }
        }
    }
    for l in 0..config.num_layers {
        let d_in = if l == 0 { e + h } else { h };
        out.push((dec_name(l, "w_ih"), vec![4 * h, d_in]));
        out.push((dec_name(l, "w_hh"), vec![4 * h, h]));
        out.push((dec_name(l, "bias"), vec![4 * h]));
    }
    out.push(("attn.w".to_string(), vec![h, h]));
    out.push(("out.w".to_string(), vec![v_out, h]));
    out.push(("out.b".to_string(), vec![v_out]));
    out
}


#[cfg(test)]
mod tests {
    use super::test_support::*;
    use super::*;
    use crate::corpus::tokenize::TokenMode;
    use crate::corpus::vocab;

    #[test]
    fn schema_covers_unidirectional_single_layer() {
        let m = tiny_model(false, 1, 1);
        let names: Vec<&str> = m.params.names().collect();
        assert_eq!(
            names,
            vec![
                "attn.w",
                "dec.l0.bias",
                "dec.l0.w_hh",
                "dec.l0.w_ih",
                "embed.in",
                "embed.out",
                "enc.l0.fw.bias",
                "enc.l0.fw.w_hh",
                "enc.l0.fw.w_ih",
                "out.b",
                "out.w",
            ]
        );
        // 9 reserved + content symbols in each vocabulary.
        assert_eq!(m.params.get("embed.in").unwrap().shape(), &[4 + 5, 3]);
        assert_eq!(m.params.get("embed.out").unwrap().shape(), &[4 + 4, 3]);
        // Input feeding widens decoder layer 0 to E + H columns.
        assert_eq!(m.params.get("dec.l0.w_ih").unwrap().shape(), &[16, 3 + 4]);
        assert_eq!(m.params.get("out.w").unwrap().shape(), &[4 + 4, 4]);
    }

    #[test]
    fn schema_covers_bidirectional_two_layer() {
        let m = tiny_model(true, 2, 1);
        for l in 0..2 {
            for dir in ["fw", "bw"] {
                assert!(m.params.contains(&enc_name(l, dir, "w_ih")));
            }
            for which in ["h", "c"] {
                assert_eq!(
                    m.params.get(&bridge_name(l, which, "w")).unwrap().shape(),
                    &[4, 8]
                );
                assert_eq!(
                    m.params.get(&bridge_name(l, which, "b")).unwrap().shape(),
                    &[4]
                );
            }
        }
        // Layer 1 consumes bridged H-dim annotations, not 2H concatenations.
        assert_eq!(
            m.params.get(&enc_name(1, "fw", "w_ih")).unwrap().shape(),
            &[16, 4]
        );
        assert_eq!(m.params.get(&dec_name(1, "w_ih")).unwrap().shape(), &[16, 4]);
    }

    #[test]
    fn init_zeroes_biases_and_bounds_weights() {
        let m = tiny_model(true, 2, 9);
        for (name, t) in m.params.iter() {
            let is_bias = name.ends_with(".bias") || name.ends_with(".b");
            for &v in t.data() {
                if is_bias {
                    assert_eq!(v, 0.0, "bias {name} not zeroed");
                } else {
                    assert!(v.abs() <= 0.1, "weight {name} out of range: {v}");
                }
            }
        }
        // Weights are genuinely random, not degenerate.
        let w = m.params.get("attn.w").unwrap();
        assert!(w.data().iter().any(|&v| v != 0.0));
    }

    #[test]
    fn init_is_seed_deterministic_and_seed_sensitive() {
        let a = tiny_model(false, 1, 11);
        let b = tiny_model(false, 1, 11);
        let c = tiny_model(false, 1, 12);
        for (name, t) in a.params.iter() {
            assert_eq!(t.data(), b.params.get(name).unwrap().data());
        }
        assert!(a
            .params
            .iter()
            .any(|(name, t)| t.data() != c.params.get(name).unwrap().data()));
    }

    #[test]
    fn from_parts_rejects_schema_drift() {
        let m = tiny_model(false, 1, 3);
        let mut missing = ParameterStore::new();
        for (name, t) in m.params.iter() {
            if name != "attn.w" {
                missing.insert(name, t.clone()).unwrap();
            }
        }
        assert!(Model::from_parts(
            m.config,
            missing,
            m.input_vocab.clone(),
            m.output_vocab.clone(),
            m.init_scheme.clone(),
            m.seed,
        )
        .is_err());

        let mut wrong_shape = m.params.clone();
        *wrong_shape.get_mut("attn.w").unwrap() = crate::tensor::Tensor::zeros(&[4, 5]);
        assert!(Model::from_parts(
            m.config,
            wrong_shape,
            m.input_vocab.clone(),
            m.output_vocab,
            m.init_scheme,
            m.seed,
        )
        .is_err());
    }

    #[test]
    fn vocabulary_mode_mismatch_is_rejected() {
        let config = tiny_model(false, 1, 1).config;
        let char_vocab = letter_vocab(TokenMode::Char, 4);
        let word_vocab = letter_vocab(TokenMode::Word, 4);
        assert!(Model::new(config, char_vocab, word_vocab, 1).is_err());
    }

    #[test]
    fn embedding_rows_track_vocabulary_sizes() {
        let m = tiny_model(false, 1, 2);
        assert_eq!(
            m.params.get("embed.in").unwrap().shape()[0],
            m.input_vocab.len()
        );
        assert_eq!(
            m.params.get("embed.out").unwrap().shape()[0],
            m.output_vocab.len()
        );
        assert_eq!(m.input_vocab.id("<unk>"), Some(vocab::UNK));
    }
}
