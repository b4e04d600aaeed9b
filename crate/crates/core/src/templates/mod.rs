//! Template-based surface realization for the restaurant domain: two fixed
//! templates, synthetic corpus generation with size equalization, lattice
//! enumeration of inputs, and surface-pattern classification of generated
//! texts (including detection of template combinations).

pub mod classify;
pub mod lexicon;
pub mod realize;
pub mod sample;
pub mod synth;

pub use classify::{classify, TemplateClassification, TemplateLabel};
pub use lexicon::Lexicon;
pub use realize::{rating_phrase, realize, realize_with, TemplateId};
pub use sample::{enumerate_mrs, split_held_out};
pub use synth::{synthesize_corpus, SynthesisConfig};
