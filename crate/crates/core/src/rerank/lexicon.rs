//! The phrase table behind the rule-based reranker: which surface strings
//! count as a verbatim mention of which attribute value.

use std::collections::BTreeMap;
use std::path::Path;

use crate::corpus::mr::E2eAttribute;
use crate::error::{Error, Result};
use crate::metrics::eval_tokens;

/// One attribute value with every surface form that counts as mentioning it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhraseEntry {
    /// The value as it appears in meaning representations.
    pub value: String,
    /// Tokenized surface variants; a text mentions the value when any
    /// variant occurs as a contiguous token run.
    pub variants: Vec<Vec<String>>,
}

/// Maps every restaurant-domain attribute to the values the reranker can
/// recognize in text, each with its surface phrase variants.
///
/// Most values are matched verbatim, but values that never surface raw —
/// `familyFriendly` yes/no and the `customerRating` categories — are matched
/// through their realized phrase forms ("family-friendly" /
/// "not family-friendly", "a high customer rating", "customer rating of
/// 3 out of 5", ...).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeLexicon {
    entries: BTreeMap<E2eAttribute, Vec<PhraseEntry>>,
}

const BUILTIN_TSV: &str = include_str!("../../data/rerank_phrases.tsv");

impl AttributeLexicon {
    /// The built-in phrase table, covering exactly the phrases the surface
    /// templates produce.
    pub fn builtin() -> Self {
        Self::from_tsv_str(BUILTIN_TSV, "builtin rerank phrase table")
            .expect("built-in rerank phrase table must parse")
    }

    /// Parse a phrase table from TSV text: one
    /// `attribute<TAB>value<TAB>variant|variant|...` triple per line, with
    /// `#` comments and blank lines ignored. `origin` names the source in
    /// error messages.
    ///
    /// Every restaurant-domain attribute must end up with at least one
    /// entry, and every entry with at least one non-empty variant.
    pub fn from_tsv_str(tsv: &str, origin: &str) -> Result<Self> {
        let mut entries: BTreeMap<E2eAttribute, Vec<PhraseEntry>> = BTreeMap::new();
        for (idx, line) in tsv.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let location = format!("{origin}:{}", idx + 1);
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(Error::parse(
                    location,
                    format!(
                        "expected attribute<TAB>value<TAB>variants, got {} fields",
                        fields.len()
                    ),
                ));
            }
            let attr = E2eAttribute::from_normalized(fields[0]).ok_or_else(|| {
                Error::parse(location.clone(), format!("unknown attribute '{}'", fields[0]))
            })?;
            let value = fields[1].trim();
            if value.is_empty() {
                return Err(Error::parse(location, "empty value"));
            }
            let mut variants = Vec::new();
            for variant in fields[2].split('|') {
                let tokens = eval_tokens(variant);
                if tokens.is_empty() {
                    return Err(Error::parse(
                        location.clone(),
                        format!("empty variant for value '{value}'"),
                    ));
                }
                variants.push(tokens);
            }
            let bucket = entries.entry(attr).or_default();
            if bucket.iter().any(|e| e.value.eq_ignore_ascii_case(value)) {
                return Err(Error::parse(
                    location,
                    format!("duplicate value '{value}' for attribute {}", attr.canonical()),
                ));
            }
            bucket.push(PhraseEntry {
                value: value.to_string(),
                variants,
            });
        }
        for attr in E2eAttribute::ALL {
            if !entries.contains_key(&attr) {
                return Err(Error::parse(
                    origin.to_string(),
                    format!("attribute {} has no entries", attr.canonical()),
                ));
            }
        }
        Ok(Self { entries })
    }

    /// Load a phrase table from a TSV file.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_tsv_str(&text, &path.display().to_string())
    }

    /// All recognizable values of `attr` with their variants.
    pub fn entries(&self, attr: E2eAttribute) -> &[PhraseEntry] {
        self.entries
            .get(&attr)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// The entry for `value` under `attr`, matched case-insensitively.
    pub fn entry(&self, attr: E2eAttribute, value: &str) -> Option<&PhraseEntry> {
        self.entries(attr)
            .iter()
            .find(|e| e.value.eq_ignore_ascii_case(value))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_covers_every_attribute_with_nonempty_variants() {
        let lex = AttributeLexicon::builtin();
        for attr in E2eAttribute::ALL {
            let entries = lex.entries(attr);
            assert!(!entries.is_empty(), "{} has no entries", attr.canonical());
            for entry in entries {
                assert!(!entry.variants.is_empty());
                assert!(entry.variants.iter().all(|v| !v.is_empty()));
            }
        }
    }

    #[test]
    fn builtin_has_the_family_friendly_pair_and_both_rating_forms() {
        let lex = AttributeLexicon::builtin();
        let yes = lex.entry(E2eAttribute::FamilyFriendly, "yes").unwrap();
        assert!(yes.variants.contains(&vec!["family-friendly".to_string()]));
        let no = lex.entry(E2eAttribute::FamilyFriendly, "no").unwrap();
        assert!(no
            .variants
            .contains(&vec!["not".to_string(), "family-friendly".to_string()]));
        // Categorical ratings through the "a VALUE customer rating" form …
        let high = lex.entry(E2eAttribute::CustomerRating, "high").unwrap();
        assert!(high.variants.iter().any(|v| v.join(" ") == "a high customer rating"));
        // … and numeric ratings through "customer rating of N out of 5".
        let three = lex.entry(E2eAttribute::CustomerRating, "3 out of 5").unwrap();
        assert!(three
            .variants
            .iter()
            .any(|v| v.join(" ") == "customer rating of 3 out of 5"));
    }

    #[test]
    fn lookup_is_case_insensitive() {
        let lex = AttributeLexicon::builtin();
        assert!(lex.entry(E2eAttribute::Food, "CHINESE").is_some());
        assert!(lex.entry(E2eAttribute::Food, "french").is_none());
    }

    #[test]
    fn variants_are_tokenized_for_matching() {
        let lex = AttributeLexicon::builtin();
        let shop = lex.entry(E2eAttribute::EatType, "coffee shop").unwrap();
        assert_eq!(shop.variants, vec![vec!["coffee".to_string(), "shop".to_string()]]);
    }

    #[test]
    fn malformed_tables_are_parse_errors() {
        let missing_field = "food\tChinese\n";
        assert!(matches!(
            AttributeLexicon::from_tsv_str(missing_field, "test"),
            Err(Error::Parse { .. })
        ));
        let unknown_attr = "colour\tred\tred\n";
        assert!(matches!(
            AttributeLexicon::from_tsv_str(unknown_attr, "test"),
            Err(Error::Parse { .. })
        ));
        let empty_variant = "food\tChinese\tchinese|\n";
        assert!(matches!(
            AttributeLexicon::from_tsv_str(empty_variant, "test"),
            Err(Error::Parse { .. })
        ));
        // A table that parses line-by-line but misses attributes is rejected.
        let incomplete = "food\tChinese\tchinese\n";
        assert!(matches!(
            AttributeLexicon::from_tsv_str(incomplete, "test"),
            Err(Error::Parse { .. })
        ));
        let duplicate = "food\tChinese\tchinese\nfood\tchinese\tchinese food\n";
        assert!(matches!(
            AttributeLexicon::from_tsv_str(duplicate, "test"),
            Err(Error::Parse { .. })
        ));
    }
}
