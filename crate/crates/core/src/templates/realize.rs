//! Surface realization of restaurant meaning representations with two fixed
//! templates that differ in their opening and in whether the customer rating
//! is mentioned before or after the location.

use crate::corpus::mr::{E2eAttribute, E2eMr};
use crate::error::{Error, Result};
use crate::templates::lexicon::Lexicon;

/// The two fixed surface templates.
///
/// * `T1` opens with "NAME is a …" and mentions the rating before the
///   location, joined into one sentence by "and".
/// * `T2` opens with "The … NAME serves …" and mentions the location in its
///   own sentence before the rating sentence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TemplateId {
    T1,
    T2,
}

impl TemplateId {
    pub const ALL: [TemplateId; 2] = [TemplateId::T1, TemplateId::T2];

    pub fn as_str(self) -> &'static str {
        match self {
            TemplateId::T1 => "t1",
            TemplateId::T2 => "t2",
        }
    }
}

/// The rating phrase, chosen by value shape: "N out of 5" becomes
/// "a customer rating of N out of 5", a categorical value becomes
/// "a VALUE customer rating".
pub fn rating_phrase(value: &str) -> String {
    let words: Vec<&str> = value.split_whitespace().collect();
    if words.len() == 4 && words[1] == "out" && words[2] == "of" {
        format!("a customer rating of {}", words.join(" "))
    } else {
        format!("a {} customer rating", value.trim())
    }
}

/// Realize `mr` with the built-in lexicon. See [`realize_with`].
pub fn realize(template: TemplateId, mr: &E2eMr) -> Result<String> {
    realize_with(template, mr, &Lexicon::builtin())
}

/// Realize `mr` as one to three sentences. `name` and `eatType` must be
/// present; every other attribute contributes its clause only when present.
/// Values are validated against `lexicon` and inserted verbatim.
pub fn realize_with(template: TemplateId, mr: &E2eMr, lexicon: &Lexicon) -> Result<String> {
    for required in [E2eAttribute::Name, E2eAttribute::EatType] {
        if !mr.contains(required) {
            return Err(Error::contract(format!(
                "realize: missing required attribute {}",
                required.canonical()
            )));
        }
    }
    for (attr, value) in mr.slots() {
        lexicon.check(*attr, value)?;
    }

    let name = mr.get(E2eAttribute::Name).unwrap();
    let eat_type = mr.get(E2eAttribute::EatType).unwrap();
    let food = mr.get(E2eAttribute::Food);
    let price = mr.get(E2eAttribute::PriceRange);
    let rating = mr.get(E2eAttribute::CustomerRating).map(rating_phrase);
    let family = mr
        .get(E2eAttribute::FamilyFriendly)
        .map(|v| v.eq_ignore_ascii_case("yes"));
    let location = location_phrase(mr);

    // "[family-friendly] EATTYPE" when familyFriendly=yes.
    let typed = if family == Some(true) {
        format!("family-friendly {eat_type}")
    } else {
        eat_type.to_string()
    };
    // "[FOOD] food [in the PRICERANGE price range]".
    let mut served = match food {
        Some(f) => format!("{f} food"),
        None => "food".to_string(),
    };
    if let Some(p) = price {
        served.push_str(&format!(" in the {p} price range"));
    }

    let mut sentences: Vec<String> = Vec::new();
    match template {
        TemplateId::T1 => {
            // "NAME is a TYPED [which serves SERVED]." — the relative clause
            // is elided entirely when there is nothing to serve up.
            let mut first = format!("{name} is a {typed}");
            if food.is_some() || price.is_some() {
                first.push_str(&format!(" which serves {served}"));
            }
            sentences.push(first);
            // Rating before location, joined by "and" when both appear.
            match (&rating, &location) {
                (Some(r), Some(l)) => sentences.push(format!("It has {r} and is located {l}")),
                (Some(r), None) => sentences.push(format!("It has {r}")),
                (None, Some(l)) => sentences.push(format!("It is located {l}")),
                (None, None) => {}
            }
        }
        TemplateId::T2 => {
            sentences.push(format!("The {typed} {name} serves {served}"));
            // Location sentence before the rating sentence.
            if let Some(l) = &location {
                sentences.push(format!("It is located {l}"));
            }
            if let Some(r) = &rating {
                sentences.push(format!("It has {r}"));
            }
        }
    }
    if family == Some(false) {
        sentences.push("It is not family-friendly".to_string());
    }

    Ok(sentences
        .iter()
        .map(|s| format!("{s}."))
        .collect::<Vec<_>>()
        .join(" "))
}

/// "in the AREA area[, near NEAR]", or "near NEAR" when only `near` is
/// present. Both templates share this phrase; only its position differs.
fn location_phrase(mr: &E2eMr) -> Option<String> {
    let area = mr.get(E2eAttribute::Area);
    let near = mr.get(E2eAttribute::Near);
    match (area, near) {
        (Some(a), Some(n)) => Some(format!("in the {a} area, near {n}")),
        (Some(a), None) => Some(format!("in the {a} area")),
        (None, Some(n)) => Some(format!("near {n}")),
        (None, None) => None,
    }
}
