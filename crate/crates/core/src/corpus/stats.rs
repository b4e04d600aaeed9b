//! Corpus statistics and vocabulary construction over preprocessed
//! instances.

use crate::corpus::tokenize::{tokenize, TokenMode};
use crate::corpus::vocab::Vocabulary;
use crate::corpus::Instance;
use crate::error::{Error, Result};

/// Averages and vocabulary sizes of a preprocessed training split.
/// Vocabulary sizes exclude the reserved control symbols.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorpusStats {
    pub instances: usize,
    pub avg_input_len: f64,
    pub avg_text_len: f64,
    pub input_vocab: usize,
    pub output_vocab: usize,
}

/// Tokenize every instance, build both vocabularies (no frequency cutoff),
/// and report the split's statistics.
pub fn build_vocabularies(
    instances: &[Instance],
    mode: TokenMode,
) -> Result<(Vocabulary, Vocabulary, CorpusStats)> {
    if instances.is_empty() {
        return Err(Error::contract("empty corpus"));
    }
    let input_seqs: Vec<Vec<String>> = instances
        .iter()
        .map(|i| tokenize(&i.input, mode))
        .collect();
    let output_seqs: Vec<Vec<String>> = instances
        .iter()
        .map(|i| tokenize(&i.reference, mode))
        .collect();

    let input_vocab = Vocabulary::build(
        mode,
        input_seqs.iter().map(|s| s.iter().map(String::as_str)),
    )?;
    let output_vocab = Vocabulary::build(
        mode,
        output_seqs.iter().map(|s| s.iter().map(String::as_str)),
    )?;

    let n = instances.len() as f64;
    let stats = CorpusStats {
        instances: instances.len(),
        avg_input_len: input_seqs.iter().map(Vec::len).sum::<usize>() as f64 / n,
        avg_text_len: output_seqs.iter().map(Vec::len).sum::<usize>() as f64 / n,
        input_vocab: input_vocab.content_len(),
        output_vocab: output_vocab.content_len(),
    };
    Ok((input_vocab, output_vocab, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::delex::DelexMap;

    fn inst(input: &str, reference: &str) -> Instance {
        Instance {
            input: input.to_string(),
            reference: reference.to_string(),
            delex: DelexMap::new(),
        }
    }

    #[test]
    fn one_pair_word_corpus() {
        let (vi, vo, stats) = build_vocabularies(&[inst("a b", "b a")], TokenMode::Word).unwrap();
        assert_eq!(vi.content_len(), 2);
        assert_eq!(vo.content_len(), 2);
        assert!(vi.contains("a") && vi.contains("b"));
        assert_eq!(stats.avg_input_len, 2.0);
        assert_eq!(stats.avg_text_len, 2.0);
        assert_eq!(stats.instances, 1);
    }

    #[test]
    fn char_mode_vocab_covers_all_text_characters() {
        let instances = vec![inst("name[NAME]", "NAME is nice."), inst("food[thai]", "thai food.")];
        let (vi, vo, _) = build_vocabularies(&instances, TokenMode::Char).unwrap();
        for i in &instances {
            for c in i.input.chars() {
                assert!(vi.contains(&c.to_string()), "{c:?} missing from input vocab");
            }
            for c in i.reference.chars() {
                assert!(vo.contains(&c.to_string()), "{c:?} missing from output vocab");
            }
        }
    }

    #[test]
    fn averages_over_instances() {
        let (_, _, stats) = build_vocabularies(
            &[inst("a", "x y z"), inst("a b c", "x")],
            TokenMode::Word,
        )
        .unwrap();
        assert_eq!(stats.avg_input_len, 2.0);
        assert_eq!(stats.avg_text_len, 2.0);
    }

    #[test]
    fn empty_corpus_is_an_error() {
        assert!(build_vocabularies(&[], TokenMode::Word).is_err());
    }
}
