//! Attribute-value lexicon for the restaurant domain: the closed value sets
//! the surface realizer accepts, shipped as an editable TSV data file.

use std::collections::BTreeMap;
use std::path::Path;

use crate::corpus::mr::E2eAttribute;
use crate::error::{Error, Result};

/// Built-in lexicon file; `Lexicon::builtin` parses it at first use.
const BUILTIN_TSV: &str = include_str!("../../data/e2e_lexicon.tsv");

/// Closed value sets per attribute. `name` and `near` are open-class: any
/// non-empty value is accepted and they never appear in the table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lexicon {
    values: BTreeMap<E2eAttribute, Vec<String>>,
}

impl Lexicon {
    /// The lexicon shipped with the crate.
    pub fn builtin() -> Lexicon {
        Lexicon::from_tsv_str(BUILTIN_TSV, "builtin lexicon")
            .expect("built-in lexicon data file must parse")
    }

    /// Parse `attribute<TAB>value` lines; `#` starts a comment. Values are
    /// kept in file order per attribute, first occurrence wins on duplicates.
    pub fn from_tsv_str(tsv: &str, origin: &str) -> Result<Lexicon> {
        let mut values: BTreeMap<E2eAttribute, Vec<String>> = BTreeMap::new();
        for (lineno, raw) in tsv.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (attr_text, value) = line.split_once('\t').ok_or_else(|| {
                Error::parse(
                    format!("{origin}:{}", lineno + 1),
                    "expected attribute<TAB>value",
                )
            })?;
            let attr = E2eAttribute::from_normalized(attr_text).ok_or_else(|| {
                Error::parse(
                    format!("{origin}:{}", lineno + 1),
                    format!("unknown attribute {attr_text:?}"),
                )
            })?;
            if matches!(attr, E2eAttribute::Name | E2eAttribute::Near) {
                return Err(Error::parse(
                    format!("{origin}:{}", lineno + 1),
                    format!("{} is open-class and cannot be listed", attr.canonical()),
                ));
            }
            let value = value.trim();
            if value.is_empty() {
                return Err(Error::parse(
                    format!("{origin}:{}", lineno + 1),
                    "empty value",
                ));
            }
            let entry = values.entry(attr).or_default();
            if !entry.iter().any(|v| v.eq_ignore_ascii_case(value)) {
                entry.push(value.to_string());
            }
        }
        if values.is_empty() {
            return Err(Error::data(format!("{origin}: lexicon has no entries")));
        }
        Ok(Lexicon { values })
    }

    pub fn from_path(path: &Path) -> Result<Lexicon> {
        let text = std::fs::read_to_string(path)?;
        Lexicon::from_tsv_str(&text, &path.display().to_string())
    }

    /// Known values for a closed-class attribute, in file order. Empty for
    /// the open-class attributes.
    pub fn values(&self, attr: E2eAttribute) -> &[String] {
        self.values.get(&attr).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Validate one attribute value: open-class attributes accept any
    /// non-empty value; closed-class values must appear in the table
    /// (ASCII-case-insensitively, so corpus-lowercased values pass).
    pub fn check(&self, attr: E2eAttribute, value: &str) -> Result<()> {
        if value.trim().is_empty() {
            return Err(Error::data(format!(
                "lexicon: empty value for {}",
                attr.canonical()
            )));
        }
        if matches!(attr, E2eAttribute::Name | E2eAttribute::Near) {
            return Ok(());
        }
        let known = self.values(attr);
        if known.iter().any(|v| v.eq_ignore_ascii_case(value)) {
            Ok(())
        } else {
            Err(Error::data(format!(
                "lexicon: unknown {} value {value:?} (known: {})",
                attr.canonical(),
                known.join(", ")
            )))
        }
    }
}
