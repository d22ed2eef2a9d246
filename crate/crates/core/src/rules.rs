//! Ordered keyword rules shared by the modality and category classifiers.
//!
//! Rule files are plain text, one rule per line:
//!
//! ```text
//! # comment
//! LABEL: pattern one | pattern two | prefix*
//! ```
//!
//! A pattern is tokenized with [`crate::normalize::tokenize`] and matches a
//! contiguous run of text tokens. Matching is case-insensitive. A trailing
//! `*` turns the last pattern token into a prefix match, so `vaccin*` matches
//! `vaccine` and `vaccines`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::normalize::tokenize;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("rule file line {line}: {reason}")]
pub struct RuleError {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeywordPattern {
    tokens: Vec<String>,
    prefix_last: bool,
}

impl KeywordPattern {
    pub fn parse(raw: &str) -> Option<Self> {
        let raw = raw.trim();
        let (body, prefix_last) = match raw.strip_suffix('*') {
            Some(body) => (body, true),
            None => (raw, false),
        };
        let tokens = tokenize(body);
        if tokens.is_empty() {
            return None;
        }
        Some(Self {
            tokens,
            prefix_last,
        })
    }

    pub fn matches(&self, text_tokens: &[String]) -> bool {
        let m = self.tokens.len();
        if text_tokens.len() < m {
            return false;
        }
        text_tokens.windows(m).any(|window| {
            window.iter().zip(&self.tokens).enumerate().all(|(i, (t, p))| {
                if self.prefix_last && i == m - 1 {
                    t.starts_with(p.as_str())
                } else {
                    t == p
                }
            })
        })
    }
}

impl fmt::Display for KeywordPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tokens.join(" "))?;
        if self.prefix_last {
            f.write_str("*")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule<L> {
    pub label: L,
    pub patterns: Vec<KeywordPattern>,
}

/// Rules in file order. The first rule with a matching pattern wins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSet<L> {
    rules: Vec<Rule<L>>,
}

impl<L> RuleSet<L>
where
    L: FromStr + Copy,
{
    pub fn parse(source: &str) -> Result<Self, RuleError> {
        let mut rules = Vec::new();
        for (idx, line) in source.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (label, patterns) = line.split_once(':').ok_or_else(|| RuleError {
                line: line_no,
                reason: "expected `LABEL: pattern | pattern`".into(),
            })?;
            let label = label.trim().parse::<L>().map_err(|_| RuleError {
                line: line_no,
                reason: format!("unknown label `{}`", label.trim()),
            })?;
            let mut parsed = Vec::new();
            for raw in patterns.split('|') {
                match KeywordPattern::parse(raw) {
                    Some(p) => parsed.push(p),
                    None => {
                        return Err(RuleError {
                            line: line_no,
                            reason: format!("empty pattern `{}`", raw.trim()),
                        })
                    }
                }
            }
            rules.push(Rule {
                label,
                patterns: parsed,
            });
        }
        Ok(Self { rules })
    }
}

impl<L: Copy> RuleSet<L> {
    pub fn rules(&self) -> &[Rule<L>] {
        &self.rules
    }

    pub fn first_match(&self, tokens: &[String]) -> Option<L> {
        self.rules
            .iter()
            .find(|r| r.patterns.iter().any(|p| p.matches(tokens)))
            .map(|r| r.label)
    }

    /// Labels of every rule that matches, in rule order, without repeats.
    pub fn all_matches(&self, tokens: &[String]) -> Vec<L>
    where
        L: PartialEq,
    {
        let mut out: Vec<L> = Vec::new();
        for rule in &self.rules {
            if !out.contains(&rule.label) && rule.patterns.iter().any(|p| p.matches(tokens)) {
                out.push(rule.label);
            }
        }
        out
    }
}
