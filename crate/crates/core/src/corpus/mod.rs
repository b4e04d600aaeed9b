//! Dataset handling: meaning representations, tokenization,
//! delexicalization, vocabularies, file formats, loaders, and statistics.

pub mod delex;
pub mod format;
pub mod load;
pub mod mr;
pub mod stats;
pub mod tokenize;
pub mod vocab;

pub use delex::{delex_e2e, delex_webnlg, relexicalize, DelexMap, DelexOutcome};
pub use load::{load_e2e_csv, load_webnlg_xml, E2eRecord, Loaded};
pub use mr::{
    parse_e2e_mr, serialize_triples, split_camel_case, E2eAttribute, E2eMr, Triple, WebNlgEntry,
};
pub use stats::{build_vocabularies, CorpusStats};
pub use tokenize::{lowercase_keep_placeholders, split_sentences, tokenize, TokenMode};
pub use vocab::{Vocabulary, BOS, EOS, PAD, UNK};

/// One aligned training instance: a serialized input, one reference text,
/// and the placeholder substitutions that delexicalization recorded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub input: String,
    pub reference: String,
    pub delex: delex::DelexMap,
}
