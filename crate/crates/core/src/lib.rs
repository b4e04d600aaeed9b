//! Data-to-text generation toolkit: attentional sequence-to-sequence models
//! over word or character symbols, restaurant/knowledge-base preprocessing
//! pipelines, template-based synthetic data, generation-diversity metrics,
//! and semantic reranking.
//!
//! Layering, bottom up:
//! - [`tensor`], [`autodiff`], [`lstm`], [`optim`], [`params`], [`rng`]:
//!   the numerical substrate (own reverse-mode gradients, no external BLAS).
//! - [`corpus`]: meaning representations, tokenization, delexicalization,
//!   vocabularies, dataset loading and statistics.
//! - [`seq2seq`]: model assembly, batched teacher-forced training, beam
//!   search, checkpoints.
//! - [`templates`]: two handcrafted sentence plans, synthetic corpus
//!   generation, template classification.
//! - [`metrics`]: BLEU, ROUGE-L, n-gram entropy, repetition/novelty
//!   statistics, multi-reference utilities.
//! - [`rerank`]: rule-based semantic-error scoring over n-best lists.

pub mod autodiff;
pub mod error;
pub mod lstm;
pub mod optim;
pub mod params;
pub mod rng;
pub mod tensor;

pub mod corpus;
pub mod seq2seq;
// Remaining modules land in dependency order as they are implemented.
pub mod templates;

pub mod metrics;
pub mod rerank;

pub use error::{Error, Result};
pub use params::ParameterStore;
pub use tensor::Tensor;
