//! Delexicalization: replacing open-class values with placeholders, and the
//! exact inverse substitution for final outputs.
//!
//! Both strategies use case-insensitive, longest-match-first substring
//! replacement with left-to-right span claiming: once a span is replaced, no
//! shorter or later match may overlap it.

use crate::corpus::mr::{split_camel_case, E2eAttribute, E2eMr, Triple};
use crate::error::{Error, Result};

/// Ordered placeholder → original surface map recorded during
/// delexicalization.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DelexMap {
    pairs: Vec<(String, String)>,
}

impl DelexMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, placeholder: &str, surface: &str) -> Result<()> {
        if self.get(placeholder).is_some() {
            return Err(Error::contract(format!(
                "placeholder {placeholder:?} recorded twice"
            )));
        }
        self.pairs
            .push((placeholder.to_string(), surface.to_string()));
        Ok(())
    }

    pub fn get(&self, placeholder: &str) -> Option<&str> {
        self.pairs
            .iter()
            .find(|(p, _)| p == placeholder)
            .map(|(_, s)| s.as_str())
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Result of delexicalizing one instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DelexOutcome {
    /// Delexicalized serialized input.
    pub input: String,
    /// Delexicalized reference text.
    pub text: String,
    /// Placeholder → original surface.
    pub record: DelexMap,
    /// Number of replacements applied to the reference text.
    pub text_replacements: usize,
}

/// Replace every non-overlapping occurrence of each needle, longest needle
/// first, scanning left to right; claimed spans block later matches.
/// Returns the rebuilt string and the replacement count.
fn replace_spans(text: &str, pairs: &[(&str, &str)], case_insensitive: bool) -> (String, usize) {
    let fold = |c: char| -> char {
        if case_insensitive {
            let mut lower = c.to_lowercase();
            match (lower.next(), lower.next()) {
                (Some(l), None) => l,
                _ => c,
            }
        } else {
            c
        }
    };
    let chars: Vec<char> = text.chars().collect();
    let folded: Vec<char> = chars.iter().map(|&c| fold(c)).collect();
    let mut claimed = vec![false; chars.len()];
    let mut matches: Vec<(usize, usize, usize)> = Vec::new();

    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(pairs[i].0.chars().count()));

    for pi in order {
        let needle: Vec<char> = pairs[pi].0.chars().map(fold).collect();
        if needle.is_empty() || needle.len() > chars.len() {
            continue;
        }
        let mut start = 0;
        while start + needle.len() <= chars.len() {
            let span = start..start + needle.len();
            if folded[span.clone()] == needle[..] && !claimed[span.clone()].iter().any(|&c| c) {
                claimed[span.clone()].iter_mut().for_each(|c| *c = true);
                matches.push((start, start + needle.len(), pi));
                start += needle.len();
            } else {
                start += 1;
            }
        }
    }

    matches.sort_by_key(|&(s, _, _)| s);
    let mut out = String::with_capacity(text.len());
    let mut pos = 0;
    for &(s, e, pi) in &matches {
        out.extend(&chars[pos..s]);
        out.push_str(pairs[pi].1);
        pos = e;
    }
    out.extend(&chars[pos..]);
    (out, matches.len())
}

/// Replace the name/near values of a restaurant MR with `NAME`/`NEAR` in
/// both the serialized input string and the reference text.
pub fn delex_e2e(mr: &E2eMr, raw_input: &str, text: &str) -> DelexOutcome {
    let mut record = DelexMap::new();
    let mut pairs: Vec<(&str, &str)> = Vec::new();
    for (attr, placeholder) in [(E2eAttribute::Name, "NAME"), (E2eAttribute::Near, "NEAR")] {
        if let Some(value) = mr.get(attr) {
            // Distinct placeholders; insert cannot collide.
            record.insert(placeholder, value).expect("fresh placeholder");
            pairs.push((value, placeholder));
        }
    }
    let (input, _) = replace_spans(raw_input, &pairs, true);
    let (text, text_replacements) = replace_spans(text, &pairs, true);
    DelexOutcome {
        input,
        text,
        record,
        text_replacements,
    }
}

/// Entity roles across a whole triple set, for placeholder selection.
fn entity_placeholders(triples: &[Triple]) -> Vec<(String, String)> {
    let key = |s: &str| s.to_lowercase();
    let subjects: Vec<String> = triples.iter().map(|t| key(&t.subject)).collect();
    let objects: Vec<String> = triples.iter().map(|t| key(&t.object)).collect();

    // (surface, key) in order of first appearance in the serialized input:
    // triple order, subject before object.
    let mut seen: Vec<(String, String)> = Vec::new();
    for t in triples {
        for surface in [&t.subject, &t.object] {
            let k = key(surface);
            if !seen.iter().any(|(_, existing)| *existing == k) {
                seen.push((surface.clone(), k));
            }
        }
    }

    let (mut agent_n, mut patient_n, mut bridge_n) = (0usize, 0usize, 0usize);
    seen.into_iter()
        .map(|(surface, k)| {
            let is_subj = subjects.contains(&k);
            let is_obj = objects.contains(&k);
            let placeholder = if is_subj && is_obj {
                bridge_n += 1;
                format!("BRIDGE-{bridge_n}")
            } else if is_subj {
                agent_n += 1;
                format!("AGENT-{agent_n}")
            } else {
                patient_n += 1;
                format!("PATIENT-{patient_n}")
            };
            (surface, placeholder)
        })
        .collect()
}

/// Delexicalize a triple set and its reference: properties are camel-split
/// and lowercased, entities replaced by `AGENT-n` / `PATIENT-n` / `BRIDGE-n`
/// according to the roles they fill anywhere in the instance.
pub fn delex_webnlg(triples: &[Triple], text: &str) -> Result<DelexOutcome> {
    if triples.is_empty() {
        return Err(Error::contract("delex_webnlg: empty triple set"));
    }
    let serialized = triples
        .iter()
        .map(|t| {
            format!(
                "{}({}[{}])",
                split_camel_case(&t.property),
                t.subject.to_lowercase(),
                t.object.to_lowercase()
            )
        })
        .collect::<Vec<_>>()
        .join(", ");

    let assignments = entity_placeholders(triples);
    let mut record = DelexMap::new();
    for (surface, placeholder) in &assignments {
        record.insert(placeholder, surface)?;
    }
    let pairs: Vec<(&str, &str)> = assignments
        .iter()
        .map(|(s, p)| (s.as_str(), p.as_str()))
        .collect();
    let (input, _) = replace_spans(&serialized, &pairs, true);
    let (text, text_replacements) = replace_spans(text, &pairs, true);
    Ok(DelexOutcome {
        input,
        text,
        record,
        text_replacements,
    })
}

/// Substitute original surfaces back for placeholders (exact, case-sensitive
/// matching; longer placeholders first so `AGENT-12` is never split by
/// `AGENT-1`).
pub fn relexicalize(text: &str, record: &DelexMap) -> String {
    let pairs: Vec<(&str, &str)> = record
        .pairs()
        .iter()
        .map(|(p, s)| (p.as_str(), s.as_str()))
        .collect();
    replace_spans(text, &pairs, false).0
}
