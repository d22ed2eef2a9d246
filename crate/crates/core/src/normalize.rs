//! Alias canonicalization and tokenization.

use unicode_normalization::char::is_combining_mark;
use unicode_normalization::{is_nfc_quick, IsNormalized, UnicodeNormalization};

use crate::corpus::DebunkRecord;

/// Replacement for every alias occurrence.
pub const CANONICAL_NAME: &str = "coronavirus";

/// Bundled alias list, one alias per line.
pub const DEFAULT_ALIASES: &str = include_str!("../data/aliases.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedClaim {
    pub record_id: String,
    pub canonical_text: String,
    pub tokens: Vec<String>,
}

/// Set of alternative names for the virus, matched case-insensitively on word
/// boundaries and replaced by [`CANONICAL_NAME`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AliasSet {
    // lowercase, longest first
    aliases: Vec<Vec<char>>,
}

impl Default for AliasSet {
    fn default() -> Self {
        Self::parse(DEFAULT_ALIASES)
    }
}

impl AliasSet {
    /// Parses one alias per line. Blank lines and `#` comments are skipped.
    pub fn parse(source: &str) -> Self {
        Self::new(
            source
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    pub fn new<I, S>(aliases: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut aliases: Vec<Vec<char>> = aliases
            .into_iter()
            .map(|a| a.as_ref().trim().to_lowercase().chars().collect::<Vec<_>>())
            .filter(|a| !a.is_empty())
            .collect();
        aliases.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        aliases.dedup();
        Self { aliases }
    }

    pub fn aliases(&self) -> impl Iterator<Item = String> + '_ {
        self.aliases.iter().map(|a| a.iter().collect())
    }

    /// Replaces every alias occurrence with `coronavirus`. Text outside the
    /// matches is left untouched, including its case.
    pub fn canonicalize(&self, text: &str) -> String {
        let chars: Vec<char> = text.chars().collect();
        let mut out = String::with_capacity(text.len());
        let mut i = 0;
        'scan: while i < chars.len() {
            if i == 0 || !is_word_char(chars[i - 1]) {
                for alias in &self.aliases {
                    let end = i + alias.len();
                    if end <= chars.len()
                        && chars[i..end]
                            .iter()
                            .zip(alias)
                            .all(|(&c, &a)| chars_match(c, a))
                        && (end == chars.len() || !is_word_char(chars[end]))
                    {
                        out.push_str(CANONICAL_NAME);
                        i = end;
                        continue 'scan;
                    }
                }
            }
            out.push(chars[i]);
            i += 1;
        }
        out
    }

    /// True when `text` holds at least one word-bounded alias occurrence.
    pub fn contains_alias(&self, text: &str) -> bool {
        self.canonicalize(text) != text
    }

    /// Alias-replaced, NFC-normalized, lowercased form of `text`.
    pub fn canonical_text(&self, text: &str) -> String {
        nfc(&self.canonicalize(text)).to_lowercase()
    }

    pub fn normalize_claim(&self, record: &DebunkRecord) -> NormalizedClaim {
        let canonical_text = self.canonical_text(&record.claim_text);
        let tokens = tokenize(&canonical_text);
        NormalizedClaim {
            record_id: record.id.clone(),
            canonical_text,
            tokens,
        }
    }
}

fn chars_match(c: char, alias: char) -> bool {
    if alias.is_whitespace() {
        return c.is_whitespace();
    }
    if c == alias {
        return true;
    }
    let mut lower = c.to_lowercase();
    lower.next() == Some(alias) && lower.next().is_none()
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || is_combining_mark(c)
}

fn is_joiner(c: char) -> bool {
    matches!(c, '-' | '\'' | '\u{2019}')
}

fn nfc(text: &str) -> std::borrow::Cow<'_, str> {
    match is_nfc_quick(text.chars()) {
        IsNormalized::Yes => std::borrow::Cow::Borrowed(text),
        _ => std::borrow::Cow::Owned(text.nfc().collect()),
    }
}

/// NFC-normalizes and lowercases `text`, then splits it into tokens.
///
/// A token is a run of letters, digits and combining marks that may contain
/// hyphens and apostrophes inside it. Hyphens and apostrophes at the edges of
/// a run are stripped.
pub fn tokenize(text: &str) -> Vec<String> {
    let lowered = nfc(text).to_lowercase();
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut flush = |current: &mut String| {
        let trimmed = current.trim_matches(is_joiner);
        if !trimmed.is_empty() {
            tokens.push(trimmed.to_string());
        }
        current.clear();
    };
    for c in lowered.chars() {
        if is_word_char(c) || is_joiner(c) {
            current.push(c);
        } else {
            flush(&mut current);
        }
    }
    flush(&mut current);
    tokens
}

/// Alias replacement with the bundled alias set.
pub fn canonicalize_aliases(text: &str) -> String {
    AliasSet::default().canonicalize(text)
}
