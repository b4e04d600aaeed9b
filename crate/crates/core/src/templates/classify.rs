//! Surface-pattern classification of generated texts: which template's
//! opening does a text use, and does it mention the customer rating before
//! or after the location? Pattern-based so it can judge free-form model
//! output, not just the realizer's own texts.

use crate::templates::realize::TemplateId;

/// Classification outcome.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TemplateLabel {
    /// Opening and information order both follow template 1.
    T1,
    /// Opening and information order both follow template 2.
    T2,
    /// Template 1 opening with template 2's location-before-rating order.
    ComboT1OpenT2Order,
    /// Template 2 opening with template 1's rating-before-location order.
    ComboT2OpenT1Order,
    /// No recognizable opening.
    Other,
}

impl TemplateLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            TemplateLabel::T1 => "T1",
            TemplateLabel::T2 => "T2",
            TemplateLabel::ComboT1OpenT2Order => "COMBO_T1_OPEN_T2_ORDER",
            TemplateLabel::ComboT2OpenT1Order => "COMBO_T2_OPEN_T1_ORDER",
            TemplateLabel::Other => "OTHER",
        }
    }

    /// True for either combination label.
    pub fn is_combo(self) -> bool {
        matches!(
            self,
            TemplateLabel::ComboT1OpenT2Order | TemplateLabel::ComboT2OpenT1Order
        )
    }
}

/// Label plus the evidence it was derived from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TemplateClassification {
    pub label: TemplateLabel,
    /// Which template's opening pattern matched, if any.
    pub opening: Option<TemplateId>,
    /// Which template's rating/location order the text follows; `None` when
    /// the text lacks one or both of the signals.
    pub order: Option<TemplateId>,
}

/// Classify a text by its opening and its rating/location order.
///
/// Opening: "X is a …" (allowing a multi-word name) matches template 1;
/// "The … serves" within the first sentence matches template 2. Order:
/// whichever of the rating phrase ("customer rating") and the location
/// phrase ("located") occurs first decides; both signals must be present,
/// otherwise the opening alone decides the label. Case-insensitive. Texts
/// with no recognizable opening are labeled `Other`.
pub fn classify(text: &str) -> TemplateClassification {
    let lower = text.to_lowercase();
    let words: Vec<&str> = lower
        .split(|c: char| !(c.is_alphanumeric() || c == '-' || c == '\''))
        .filter(|w| !w.is_empty())
        .collect();

    let opening = detect_opening(&lower, &words);
    let order = detect_order(&lower);

    let label = match (opening, order) {
        (None, _) => TemplateLabel::Other,
        (Some(TemplateId::T1), Some(TemplateId::T2)) => TemplateLabel::ComboT1OpenT2Order,
        (Some(TemplateId::T2), Some(TemplateId::T1)) => TemplateLabel::ComboT2OpenT1Order,
        (Some(TemplateId::T1), _) => TemplateLabel::T1,
        (Some(TemplateId::T2), _) => TemplateLabel::T2,
    };
    TemplateClassification {
        label,
        opening,
        order,
    }
}

fn detect_opening(lower: &str, words: &[&str]) -> Option<TemplateId> {
    // "X is a …" with a name of up to three words ("NAME", "The Phoenix",
    // "The Rice Boat"). Checked first: it is the more specific pattern.
    for i in 1..=3 {
        if words.len() > i + 1 && words[i] == "is" && words[i + 1] == "a" {
            return Some(TemplateId::T1);
        }
    }
    // "The … serves" within the first sentence.
    if words.first() == Some(&"the") {
        let first_stop = lower.find('.').unwrap_or(lower.len());
        if find_word(lower, "serves").is_some_and(|p| p < first_stop) {
            return Some(TemplateId::T2);
        }
    }
    None
}

fn detect_order(lower: &str) -> Option<TemplateId> {
    let rating = lower.find("customer rating")?;
    let located = find_word(lower, "located")?;
    if rating < located {
        Some(TemplateId::T1)
    } else {
        Some(TemplateId::T2)
    }
}

/// Byte position of `word` as a whole word (non-alphanumeric boundaries).
fn find_word(haystack: &str, word: &str) -> Option<usize> {
    let mut from = 0;
    while let Some(rel) = haystack[from..].find(word) {
        let pos = from + rel;
        let before_ok = haystack[..pos]
            .chars()
            .next_back()
            .is_none_or(|c| !c.is_alphanumeric());
        let after_ok = haystack[pos + word.len()..]
            .chars()
            .next()
            .is_none_or(|c| !c.is_alphanumeric());
        if before_ok && after_ok {
            return Some(pos);
        }
        from = pos + word.len();
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::mr::{E2eAttribute, E2eMr};
    use crate::templates::lexicon::Lexicon;
    use crate::templates::realize::realize;

    #[test]
    fn first_learned_combination_is_t1_open_t2_order() {
        let text = "NAME is a restaurant which serves English food in the moderate price \
                    range. It is located in the city centre area, near NEAR. It has a customer \
                    rating of 1 out of 5. It is not family friendly.";
        let c = classify(text);
        assert_eq!(c.label, TemplateLabel::ComboT1OpenT2Order);
        assert_eq!(c.opening, Some(TemplateId::T1));
        assert_eq!(c.order, Some(TemplateId::T2));
    }

    #[test]
    fn second_learned_combination_is_t2_open_t1_order() {
        let text = "The family-friendly pub NAME serves Indian food in the low price range. \
                    It has a customer rating of 5 out of 5 and is located in the riverside \
                    area, near NEAR.";
        let c = classify(text);
        assert_eq!(c.label, TemplateLabel::ComboT2OpenT1Order);
        assert_eq!(c.opening, Some(TemplateId::T2));
        assert_eq!(c.order, Some(TemplateId::T1));
    }

    #[test]
    fn template_examples_classify_as_their_template() {
        let t1 = "NAME is a family-friendly coffee shop which serves Chinese food in the low \
                  price range. It has a high customer rating and is located in the city centre \
                  area, near NEAR.";
        assert_eq!(classify(t1).label, TemplateLabel::T1);
        let t2 = "The family-friendly coffee shop NAME serves Chinese food in the low price \
                  range. It is located in the city centre area, near NEAR. It has a high \
                  customer rating.";
        assert_eq!(classify(t2).label, TemplateLabel::T2);
    }

    #[test]
    fn lowercased_model_output_classifies_the_same() {
        let t1 = "name is a family-friendly coffee shop which serves chinese food in the low \
                  price range . it has a high customer rating and is located in the city \
                  centre area , near near .";
        assert_eq!(classify(t1).label, TemplateLabel::T1);
    }

    #[test]
    fn opening_alone_decides_when_order_signals_are_missing() {
        let c = classify("NAME is a restaurant.");
        assert_eq!(c.label, TemplateLabel::T1);
        assert_eq!(c.order, None);
        let c = classify("The pub NAME serves food. It has a high customer rating.");
        assert_eq!(c.label, TemplateLabel::T2);
        assert_eq!(c.order, None);
    }

    #[test]
    fn unrecognizable_openings_are_other() {
        assert_eq!(classify("").label, TemplateLabel::Other);
        assert_eq!(
            classify("A lovely place in the city centre.").label,
            TemplateLabel::Other
        );
        // Location and rating signals alone cannot rescue a missing opening.
        assert_eq!(
            classify("Located in the city centre with a high customer rating.").label,
            TemplateLabel::Other
        );
    }

    #[test]
    fn multi_word_names_still_match_the_t1_opening() {
        let c = classify("The Rice Boat is a restaurant which serves Indian food.");
        assert_eq!(c.label, TemplateLabel::T1);
        assert_eq!(c.opening, Some(TemplateId::T1));
    }

    #[test]
    fn realized_texts_classify_as_their_template_across_the_lexicon() {
        // Exhaustive self-consistency over the full value lattice.
        let lex = Lexicon::builtin();
        let mut checked = 0usize;
        for mr in crate::templates::sample::enumerate_mrs(&lex) {
            for template in TemplateId::ALL {
                let text = realize(template, &mr).unwrap();
                let got = classify(&text);
                assert_eq!(
                    got.label,
                    match template {
                        TemplateId::T1 => TemplateLabel::T1,
                        TemplateId::T2 => TemplateLabel::T2,
                    },
                    "template {template:?} misclassified for {text:?}"
                );
                checked += 1;
            }
        }
        assert_eq!(checked, 2 * 5670);
        // Spot-check the lattice includes order-signal-free inputs.
        let minimal = E2eMr::new(vec![
            (E2eAttribute::Name, "NAME".to_string()),
            (E2eAttribute::EatType, "pub".to_string()),
        ])
        .unwrap();
        assert_eq!(
            classify(&realize(TemplateId::T2, &minimal).unwrap()).label,
            TemplateLabel::T2
        );
    }
}
