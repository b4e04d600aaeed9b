//! Attentional encoder-decoder: model assembly, batched teacher-forced
//! training, stepwise inference, beam search, and checkpointing.
//!
//! Two deliberately separate forward paths exist:
//! - [`forward`] builds a gradient tape over padded mini-batches (training,
//!   perplexity);
//! - [`infer`] is a pure-tensor stepwise path (greedy/beam decoding).
//!
//! With dropout disabled both paths produce identical distributions; the
//! test suite pins that equivalence.

pub mod beam;
pub mod checkpoint;
pub mod config;
pub mod forward;
pub mod infer;
pub mod model;
pub mod train;

pub use beam::{beam_decode, beam_search, BeamScorer, Hypothesis, ModelScorer};
pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use config::{preset, ModelConfig, Preset, TrainingSchedule, PRESET_KEYS};
pub use forward::{forward_batch, teacher_forced_loss, ForwardBatch};
pub use infer::{attend, decode_step, encode, greedy_decode, DecoderState, Encoded, StepOutput};
pub use model::Model;
pub use train::{encode_pairs, perplexity, train, EncodedPair, EpochLog, TrainOutcome};
