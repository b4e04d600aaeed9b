//! Synthetic corpus generation: realize a set of meaning representations
//! with one or both templates, equalizing corpus size by repetition.

use crate::corpus::tokenize::lowercase_keep_placeholders;
use crate::corpus::Instance;
use crate::error::{Error, Result};
use crate::templates::lexicon::Lexicon;
use crate::templates::realize::{realize_with, TemplateId};

/// Which templates to synthesize with and how often to repeat the corpus.
/// The single-template corpora are repeated twice so that every experiment
/// trains on the same number of pairs as the two-template concatenation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SynthesisConfig {
    /// Non-empty, duplicate-free subset of the two templates, in order.
    pub templates: Vec<TemplateId>,
    /// How many times the whole corpus is emitted.
    pub repetition_factor: usize,
}

impl SynthesisConfig {
    /// The standard configuration for a template selection: repetition 2 for
    /// a single template, 1 for both.
    pub fn standard(templates: &[TemplateId]) -> Result<SynthesisConfig> {
        let config = SynthesisConfig {
            templates: templates.to_vec(),
            repetition_factor: if templates.len() == 1 { 2 } else { 1 },
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.templates.is_empty() {
            return Err(Error::contract("synthesis: empty template set"));
        }
        let distinct: std::collections::BTreeSet<_> = self.templates.iter().collect();
        if distinct.len() != self.templates.len() {
            return Err(Error::contract("synthesis: duplicate templates"));
        }
        if self.repetition_factor == 0 {
            return Err(Error::contract("synthesis: repetition factor must be ≥ 1"));
        }
        Ok(())
    }
}

/// Realize every input that has the two required attributes with every
/// configured template. Output order is deterministic: all pairs of the
/// first template, then all of the second, the whole corpus repeated
/// `repetition_factor` times. Inputs are serialized in the corpus format;
/// references are lowercased with placeholders preserved.
pub fn synthesize_corpus(
    inputs: &[crate::corpus::mr::E2eMr],
    config: &SynthesisConfig,
    lexicon: &Lexicon,
) -> Result<Vec<Instance>> {
    config.validate()?;
    let usable: Vec<&crate::corpus::mr::E2eMr> = inputs
        .iter()
        .filter(|mr| {
            mr.contains(crate::corpus::mr::E2eAttribute::Name)
                && mr.contains(crate::corpus::mr::E2eAttribute::EatType)
        })
        .collect();
    if usable.is_empty() {
        return Err(Error::contract(
            "synthesis: no input has both name and eatType",
        ));
    }

    let mut block: Vec<Instance> = Vec::with_capacity(usable.len() * config.templates.len());
    for template in &config.templates {
        for mr in &usable {
            let text = realize_with(*template, mr, lexicon)?;
            block.push(Instance {
                input: mr.serialize()?,
                reference: lowercase_keep_placeholders(&text),
                delex: Default::default(),
            });
        }
    }
    let mut out = Vec::with_capacity(block.len() * config.repetition_factor);
    for _ in 0..config.repetition_factor {
        out.extend(block.iter().cloned());
    }
    Ok(out)
}
