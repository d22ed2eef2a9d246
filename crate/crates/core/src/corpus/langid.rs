//! Character-trigram language identification.
//!
//! Each bundled language has a profile built from a short sample of prose.
//! A text is assigned the language whose trigram frequency vector has the
//! highest cosine similarity with the text's own vector.

use std::collections::HashMap;
use std::sync::OnceLock;

use unicode_normalization::char::is_combining_mark;

use super::LangCode;

/// Best similarity below this yields `und`.
pub const DEFAULT_SIMILARITY_FLOOR: f64 = 0.25;
/// Texts shorter than this many characters yield `und`.
pub const MIN_TEXT_CHARS: usize = 20;

const BUNDLED: &[(&str, &str)] = &[
    ("en", include_str!("../../data/langid/en.txt")),
    ("es", include_str!("../../data/langid/es.txt")),
    ("fr", include_str!("../../data/langid/fr.txt")),
    ("hi", include_str!("../../data/langid/hi.txt")),
    ("pt", include_str!("../../data/langid/pt.txt")),
];

type Trigram = [char; 3];

#[derive(Debug, Clone)]
struct Profile {
    code: LangCode,
    counts: HashMap<Trigram, f64>,
    norm: f64,
}

impl Profile {
    fn new(code: LangCode, sample: &str) -> Self {
        let counts = trigram_counts(sample);
        let norm = l2(&counts);
        Self { code, counts, norm }
    }
}

fn l2(counts: &HashMap<Trigram, f64>) -> f64 {
    counts.values().map(|v| v * v).sum::<f64>().sqrt()
}

fn trigram_counts(text: &str) -> HashMap<Trigram, f64> {
    let mut cleaned = vec![' '];
    for c in text.chars().flat_map(char::to_lowercase) {
        if c.is_alphabetic() || is_combining_mark(c) {
            cleaned.push(c);
        } else if cleaned.last() != Some(&' ') {
            cleaned.push(' ');
        }
    }
    if cleaned.last() != Some(&' ') {
        cleaned.push(' ');
    }
    let mut counts = HashMap::new();
    for w in cleaned.windows(3) {
        *counts.entry([w[0], w[1], w[2]]).or_insert(0.0) += 1.0;
    }
    counts
}

#[derive(Debug, Clone)]
pub struct LanguageIdentifier {
    profiles: Vec<Profile>,
    floor: f64,
    min_chars: usize,
}

impl Default for LanguageIdentifier {
    fn default() -> Self {
        static BUNDLED_PROFILES: OnceLock<Vec<Profile>> = OnceLock::new();
        let profiles = BUNDLED_PROFILES
            .get_or_init(|| {
                BUNDLED
                    .iter()
                    .map(|(code, sample)| Profile::new(code.parse().expect("bundled code"), sample))
                    .collect()
            })
            .clone();
        Self {
            profiles,
            floor: DEFAULT_SIMILARITY_FLOOR,
            min_chars: MIN_TEXT_CHARS,
        }
    }
}

impl LanguageIdentifier {
    pub fn with_floor(mut self, floor: f64) -> Self {
        self.floor = floor;
        self
    }

    /// Adds or replaces a profile trained on `sample`.
    pub fn with_profile(mut self, code: LangCode, sample: &str) -> Self {
        self.profiles.retain(|p| p.code != code);
        self.profiles.push(Profile::new(code, sample));
        self.profiles.sort_by(|a, b| a.code.cmp(&b.code));
        self
    }

    pub fn languages(&self) -> impl Iterator<Item = &LangCode> {
        self.profiles.iter().map(|p| &p.code)
    }

    /// Similarity against every profile, in profile order.
    pub fn similarities(&self, text: &str) -> Vec<(LangCode, f64)> {
        let counts = trigram_counts(text);
        let norm = l2(&counts);
        self.profiles
            .iter()
            .map(|p| {
                let sim = if norm == 0.0 || p.norm == 0.0 {
                    0.0
                } else {
                    let dot: f64 = counts
                        .iter()
                        .filter_map(|(g, v)| p.counts.get(g).map(|w| v * w))
                        .sum();
                    dot / (norm * p.norm)
                };
                (p.code.clone(), sim)
            })
            .collect()
    }

    pub fn detect(&self, text: &str) -> LangCode {
        if text.trim().chars().count() < self.min_chars {
            return LangCode::undetermined();
        }
        let mut best: Option<(LangCode, f64)> = None;
        for (code, sim) in self.similarities(text) {
            // strict > keeps the first profile on ties
            if best.as_ref().is_none_or(|(_, b)| sim > *b) {
                best = Some((code, sim));
            }
        }
        match best {
            Some((code, sim)) if sim >= self.floor => code,
            _ => LangCode::undetermined(),
        }
    }
}

/// Detects with the bundled profiles and default floor.
pub fn detect_language(text: &str) -> LangCode {
    LanguageIdentifier::default().detect(text)
}
