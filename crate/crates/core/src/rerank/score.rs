//! Error-point scoring of a text against a meaning representation, and the
//! reranking of beam output it enables.

use crate::corpus::mr::{E2eAttribute, E2eMr};
use crate::metrics::eval_tokens;
use crate::rerank::lexicon::{AttributeLexicon, PhraseEntry};

/// Error points of one text against one meaning representation. Each
/// attribute contributes at most one omission (its value not mentioned) and
/// one addition (a different value of it mentioned).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ErrorScore {
    /// Attributes present in the meaning representation whose value the
    /// text does not mention.
    pub omissions: usize,
    /// Attributes for which the text mentions a value the meaning
    /// representation does not carry.
    pub additions: usize,
}

impl ErrorScore {
    /// Total error points: omissions + additions.
    pub fn total(self) -> usize {
        self.omissions + self.additions
    }

    /// True when the text mentions exactly the attributes of the meaning
    /// representation.
    pub fn is_zero(self) -> bool {
        self.total() == 0
    }
}

/// All occurrences of `phrase` as a contiguous token run, as `(start, end)`
/// half-open index pairs.
fn occurrences(tokens: &[String], phrase: &[String]) -> Vec<(usize, usize)> {
    if phrase.is_empty() || tokens.len() < phrase.len() {
        return Vec::new();
    }
    tokens
        .windows(phrase.len())
        .enumerate()
        .filter(|(_, w)| *w == phrase)
        .map(|(i, _)| (i, i + phrase.len()))
        .collect()
}

/// Which values of one attribute the text mentions.
///
/// A value counts as mentioned when one of its variants occurs somewhere
/// that is not strictly inside a longer match of a *different* value of the
/// same attribute. The containment rule keeps "family-friendly" from firing
/// inside "not family-friendly" while still letting the positive form match
/// on its own.
fn present_values(entries: &[PhraseEntry], tokens: &[String]) -> Vec<bool> {
    let spans_per_value: Vec<Vec<(usize, usize)>> = entries
        .iter()
        .map(|entry| {
            let mut spans: Vec<(usize, usize)> = entry
                .variants
                .iter()
                .flat_map(|variant| occurrences(tokens, variant))
                .collect();
            spans.sort_unstable();
            spans.dedup();
            spans
        })
        .collect();
    (0..entries.len())
        .map(|v| {
            spans_per_value[v].iter().any(|&(s, e)| {
                !spans_per_value.iter().enumerate().any(|(other, spans)| {
                    other != v
                        && spans
                            .iter()
                            .any(|&(os, oe)| os <= s && e <= oe && (os, oe) != (s, e))
                })
            })
        })
        .collect()
}

/// Score `text` against `mr` by verbatim attribute-value matching.
///
/// For every attribute in the meaning representation, the text must mention
/// its value (through any surface variant in `lexicon`, or the raw value for
/// open-class values such as literal names) — otherwise one omission point.
/// For every attribute, mentioning a lexicon value the meaning
/// representation does not carry costs one addition point. The text is
/// compared lowercased; scoring never fails.
pub fn score(mr: &E2eMr, text: &str, lexicon: &AttributeLexicon) -> ErrorScore {
    let tokens = eval_tokens(text);
    let mut result = ErrorScore::default();
    for attr in E2eAttribute::ALL {
        let entries = lexicon.entries(attr);
        let present = present_values(entries, &tokens);
        let mr_value = mr.get(attr);

        if let Some(value) = mr_value {
            let listed = entries
                .iter()
                .position(|e| e.value.eq_ignore_ascii_case(value));
            let mentioned = match listed {
                Some(i) => present[i],
                // Open-class or unlisted value: fall back to the raw value.
                None => {
                    let raw = eval_tokens(value);
                    !raw.is_empty() && !occurrences(&tokens, &raw).is_empty()
                }
            };
            if !mentioned {
                result.omissions += 1;
            }
        }

        let foreign_mentioned = entries.iter().zip(&present).any(|(e, &p)| {
            p && mr_value.is_none_or(|v| !e.value.eq_ignore_ascii_case(v))
        });
        if foreign_mentioned {
            result.additions += 1;
        }
    }
    result
}

/// The stable permutation that orders `texts` by ascending error total.
///
/// `rerank_indices(mr, texts, lexicon)[rank]` is the original index of the
/// text at `rank` after reranking. Ties keep their input order, so beam
/// output sorted by log-probability stays log-probability-sorted within each
/// error level.
pub fn rerank_indices(mr: &E2eMr, texts: &[String], lexicon: &AttributeLexicon) -> Vec<usize> {
    let totals: Vec<usize> = texts.iter().map(|t| score(mr, t, lexicon).total()).collect();
    let mut order: Vec<usize> = (0..texts.len()).collect();
    order.sort_by_key(|&i| totals[i]);
    order
}

/// Reorder beam hypotheses by ascending error total, preserving model order
/// within ties. An empty list stays empty.
pub fn rerank(mr: &E2eMr, texts: Vec<String>, lexicon: &AttributeLexicon) -> Vec<String> {
    let order = rerank_indices(mr, &texts, lexicon);
    let mut slots: Vec<Option<String>> = texts.into_iter().map(Some).collect();
    order
        .into_iter()
        .map(|i| slots[i].take().expect("permutation visits each index once"))
        .collect()
}
