use crate::normalize::tokenize;
use crate::rules::{RuleError, RuleSet};

use super::Modality;

pub const DEFAULT_MODALITY_RULES: &str = include_str!("../../data/modality_rules.txt");

/// Keyword rules mapping claim wording to a content modality.
///
/// One matching class gives that class, several distinct classes give
/// `mixed`, and no match gives `text`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModalityRules(RuleSet<Modality>);

impl Default for ModalityRules {
    fn default() -> Self {
        Self::parse(DEFAULT_MODALITY_RULES).expect("bundled modality rules are valid")
    }
}

impl ModalityRules {
    pub fn parse(source: &str) -> Result<Self, RuleError> {
        RuleSet::parse(source).map(Self)
    }

    pub fn classify(&self, claim_text: &str) -> Modality {
        let tokens = tokenize(claim_text);
        let matched = self.0.all_matches(&tokens);
        match matched.as_slice() {
            [] => Modality::Text,
            [single] => *single,
            _ => Modality::Mixed,
        }
    }
}

/// Classifies with the bundled rules.
pub fn classify_modality(claim_text: &str) -> Modality {
    ModalityRules::default().classify(claim_text)
}
