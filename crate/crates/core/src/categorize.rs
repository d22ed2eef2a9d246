//! Rule-based assignment of the ten COVID-19 misinformation categories.

use std::fmt;
use std::str::FromStr;

use crate::normalize::tokenize;
use crate::rules::{RuleError, RuleSet};

pub const DEFAULT_CATEGORY_RULES: &str = include_str!("../data/category_rules.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    /// Public authority action.
    PubAuthAction,
    /// Community spread and impact.
    CommSpread,
    /// Medical advice, self-treatments and virus effects.
    GenMedAdv,
    /// Prominent actors.
    PromActs,
    /// Conspiracies.
    Consp,
    /// Virus transmission.
    VirTrans,
    /// Virus origin and properties.
    VirOrgn,
    /// Public reaction.
    PubPrep,
    /// Vaccines, medical treatments and tests.
    Vacc,
    /// Anything else. Rendered as `None`.
    Other,
}

impl Category {
    pub const ALL: [Category; 10] = [
        Category::PubAuthAction,
        Category::CommSpread,
        Category::GenMedAdv,
        Category::PromActs,
        Category::Consp,
        Category::VirTrans,
        Category::VirOrgn,
        Category::PubPrep,
        Category::Vacc,
        Category::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::PubAuthAction => "PubAuthAction",
            Category::CommSpread => "CommSpread",
            Category::GenMedAdv => "GenMedAdv",
            Category::PromActs => "PromActs",
            Category::Consp => "Consp",
            Category::VirTrans => "VirTrans",
            Category::VirOrgn => "VirOrgn",
            Category::PubPrep => "PubPrep",
            Category::Vacc => "Vacc",
            Category::Other => "None",
        }
    }
}

impl serde::Serialize for Category {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::ALL
            .into_iter()
            .find(|c| c.as_str() == s.trim())
            .ok_or_else(|| s.to_string())
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Category rules in file order; the first rule with a matching pattern wins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryRules(RuleSet<Category>);

impl Default for CategoryRules {
    fn default() -> Self {
        Self::parse(DEFAULT_CATEGORY_RULES).expect("bundled category rules are valid")
    }
}

impl CategoryRules {
    pub fn parse(source: &str) -> Result<Self, RuleError> {
        RuleSet::parse(source).map(Self)
    }

    pub fn rule_set(&self) -> &RuleSet<Category> {
        &self.0
    }

    /// Classifies alias-canonicalized claim text.
    pub fn classify(&self, canonical_text: &str) -> Category {
        self.0
            .first_match(&tokenize(canonical_text))
            .unwrap_or(Category::Other)
    }
}

pub fn classify_category(canonical_text: &str, rules: &CategoryRules) -> Category {
    rules.classify(canonical_text)
}
