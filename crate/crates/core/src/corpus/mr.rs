//! Meaning representations: restaurant attribute-value MRs and
//! knowledge-base triples, with parsing and bracketed serialization.

use crate::corpus::tokenize::lowercase_keep_placeholders;
use crate::error::{Error, Result};

/// The closed attribute set of the restaurant domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum E2eAttribute {
    Name,
    EatType,
    Food,
    PriceRange,
    CustomerRating,
    Area,
    FamilyFriendly,
    Near,
}

impl E2eAttribute {
    pub const ALL: [E2eAttribute; 8] = [
        E2eAttribute::Name,
        E2eAttribute::EatType,
        E2eAttribute::Food,
        E2eAttribute::PriceRange,
        E2eAttribute::CustomerRating,
        E2eAttribute::Area,
        E2eAttribute::FamilyFriendly,
        E2eAttribute::Near,
    ];

    /// Canonical camel-case identifier.
    pub fn canonical(self) -> &'static str {
        match self {
            E2eAttribute::Name => "name",
            E2eAttribute::EatType => "eatType",
            E2eAttribute::Food => "food",
            E2eAttribute::PriceRange => "priceRange",
            E2eAttribute::CustomerRating => "customerRating",
            E2eAttribute::Area => "area",
            E2eAttribute::FamilyFriendly => "familyFriendly",
            E2eAttribute::Near => "near",
        }
    }

    /// Lowercase human-readable form used when serializing inputs.
    pub fn surface(self) -> &'static str {
        match self {
            E2eAttribute::Name => "name",
            E2eAttribute::EatType => "eat type",
            E2eAttribute::Food => "food",
            E2eAttribute::PriceRange => "price range",
            E2eAttribute::CustomerRating => "customer rating",
            E2eAttribute::Area => "area",
            E2eAttribute::FamilyFriendly => "family friendly",
            E2eAttribute::Near => "near",
        }
    }

    /// Whitespace- and case-insensitive match against the canonical set
    /// (accepts "customer rating", "customerRating", "Customer Rating", …).
    pub fn from_normalized(s: &str) -> Option<Self> {
        let key: String = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .flat_map(char::to_lowercase)
            .collect();
        Self::ALL
            .iter()
            .copied()
            .find(|a| a.canonical().to_lowercase() == key)
    }
}

/// Ordered attribute-value slots; duplicates rejected at construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct E2eMr {
    slots: Vec<(E2eAttribute, String)>,
}

impl E2eMr {
    pub fn new(slots: Vec<(E2eAttribute, String)>) -> Result<Self> {
        for (i, (attr, _)) in slots.iter().enumerate() {
            if slots[..i].iter().any(|(a, _)| a == attr) {
                return Err(Error::contract(format!(
                    "duplicate attribute {:?}",
                    attr.canonical()
                )));
            }
        }
        Ok(E2eMr { slots })
    }

    pub fn slots(&self) -> &[(E2eAttribute, String)] {
        &self.slots
    }

    pub fn get(&self, attr: E2eAttribute) -> Option<&str> {
        self.slots
            .iter()
            .find(|(a, _)| *a == attr)
            .map(|(_, v)| v.as_str())
    }

    pub fn contains(&self, attr: E2eAttribute) -> bool {
        self.get(attr).is_some()
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Lowercased bracketed form: `attr[value], attr[value], …`.
    /// Uppercase placeholder tokens inside values are preserved.
    pub fn serialize(&self) -> Result<String> {
        if self.slots.is_empty() {
            return Err(Error::contract("serialize: empty meaning representation"));
        }
        Ok(self
            .slots
            .iter()
            .map(|(a, v)| format!("{}[{}]", a.surface(), lowercase_keep_placeholders(v)))
            .collect::<Vec<_>>()
            .join(", "))
    }
}

/// Parse a comma-separated `attribute[value]` list. Attribute names are
/// matched whitespace- and case-insensitively against the canonical set;
/// errors carry the byte offset of the offending span.
pub fn parse_e2e_mr(text: &str) -> Result<E2eMr> {
    let err = |offset: usize, message: &str| {
        Err(Error::parse(
            format!("offset {offset}"),
            message.to_string(),
        ))
    };
    let mut slots: Vec<(E2eAttribute, String)> = Vec::new();
    let mut pos = 0usize;
    let bytes = text.as_bytes();
    loop {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos >= bytes.len() {
            break;
        }
        let attr_start = pos;
        let Some(open_rel) = text[pos..].find('[') else {
            return err(pos, "expected attribute[value], found no '['");
        };
        let open = pos + open_rel;
        let attr_text = text[attr_start..open].trim();
        if attr_text.is_empty() {
            return err(attr_start, "empty attribute name before '['");
        }
        let Some(attr) = E2eAttribute::from_normalized(attr_text) else {
            return Err(Error::parse(
                format!("offset {attr_start}"),
                format!("unknown attribute {attr_text:?}"),
            ));
        };
        let Some(close_rel) = text[open..].find(']') else {
            return err(open, "unclosed '['");
        };
        let close = open + close_rel;
        let value = text[open + 1..close].trim();
        if value.is_empty() {
            return err(open + 1, "empty attribute value");
        }
        if slots.iter().any(|(a, _)| *a == attr) {
            return Err(Error::parse(
                format!("offset {attr_start}"),
                format!("duplicate attribute {:?}", attr.canonical()),
            ));
        }
        slots.push((attr, value.to_string()));
        pos = close + 1;
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos >= bytes.len() {
            break;
        }
        if bytes[pos] != b',' {
            return err(pos, "expected ',' between attribute[value] pairs");
        }
        pos += 1;
        let mut rest = pos;
        while rest < bytes.len() && bytes[rest].is_ascii_whitespace() {
            rest += 1;
        }
        if rest >= bytes.len() {
            return err(pos, "expected attribute[value] after ','");
        }
    }
    if slots.is_empty() {
        return err(0, "no attribute[value] pairs");
    }
    E2eMr::new(slots)
}

/// One subject–property–object statement.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Triple {
    pub subject: String,
    pub property: String,
    pub object: String,
}

impl Triple {
    pub fn new(
        subject: impl Into<String>,
        property: impl Into<String>,
        object: impl Into<String>,
    ) -> Self {
        Triple {
            subject: subject.into(),
            property: property.into(),
            object: object.into(),
        }
    }
}

/// One knowledge-base instance: a triple set with its reference texts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WebNlgEntry {
    pub triples: Vec<Triple>,
    pub references: Vec<String>,
}

/// Lowercased bracketed form: `property(subject[object]), …`.
/// The property is lowercased as-is; camel-case splitting is a separate
/// preprocessing step applied by the delexicalizer.
pub fn serialize_triples(triples: &[Triple]) -> Result<String> {
    if triples.is_empty() {
        return Err(Error::contract("serialize: empty triple set"));
    }
    Ok(triples
        .iter()
        .map(|t| {
            format!(
                "{}({}[{}])",
                lowercase_keep_placeholders(&t.property),
                lowercase_keep_placeholders(&t.subject),
                lowercase_keep_placeholders(&t.object)
            )
        })
        .collect::<Vec<_>>()
        .join(", "))
}

/// Insert spaces at lowercase→uppercase boundaries, then lowercase:
/// `"isPartOf"` → `"is part of"`.
pub fn split_camel_case(property: &str) -> String {
    let mut out = String::with_capacity(property.len() + 4);
    let mut prev_lower = false;
    for c in property.chars() {
        if prev_lower && c.is_uppercase() {
            out.push(' ');
        }
        prev_lower = c.is_lowercase();
        out.extend(c.to_lowercase());
    }
    out
}
