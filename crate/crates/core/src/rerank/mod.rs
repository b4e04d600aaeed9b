//! Rule-based reranking of beam hypotheses.
//!
//! A generated text is scored against its meaning representation by
//! verbatim phrase matching: one error point for every attribute value the
//! text fails to mention (omission) and one for every value it mentions
//! that the meaning representation does not carry (addition). Sorting a
//! beam's hypotheses by ascending error total — stably, so the model's
//! log-probability order survives within each error level — moves correct
//! candidates toward the top without any learned component.

pub mod lexicon;
pub mod score;

pub use lexicon::{AttributeLexicon, PhraseEntry};
pub use score::{rerank, rerank_indices, score, ErrorScore};
