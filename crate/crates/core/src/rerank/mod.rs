//! Second-stage relevance scoring of (query, candidate) pairs.
//!
//! Every backend maps a pair of canonical claim texts to a score in `[0, 1]`.
//! Two deterministic built-ins ship with the crate; any other scorer, neural
//! or otherwise, plugs in through the line protocol of [`ExternalBackend`].

mod external;
mod ngram;
mod tfidf;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

pub use external::ExternalBackend;
pub use ngram::CharNgramBackend;
pub use tfidf::TfidfCosineBackend;

/// Relevance threshold used when nothing else is configured.
pub const DEFAULT_THRESHOLD: f64 = 0.8;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ScoreError {
    #[error("backend protocol error: {0}")]
    Protocol(String),
    #[error("backend returned score {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("backend process failed: {0}")]
    Process(String),
}

impl ScoreError {
    /// True when the backend cannot score any further pairs.
    pub fn is_fatal(&self) -> bool {
        matches!(self, ScoreError::Process(_))
    }
}

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("empty backend command")]
    EmptyCommand,
    #[error("cannot parse backend command `{0}`")]
    BadCommand(String),
    #[error("failed to start backend `{command}`")]
    Spawn {
        command: String,
        #[source]
        source: std::io::Error,
    },
    #[error("threshold {0} is outside [0, 1]")]
    InvalidThreshold(f64),
}

/// A pairwise similarity scorer.
pub trait Similarity: Send + Sync {
    /// Short name recorded in run manifests.
    fn name(&self) -> String;

    /// Scores two canonical claim texts. Built-in backends are symmetric.
    fn score_pair(&self, a: &str, b: &str) -> Result<f64, ScoreError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendKind {
    TfidfCosine,
    CharNgram,
    External,
}

impl BackendKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BackendKind::TfidfCosine => "tfidf-cosine",
            BackendKind::CharNgram => "char-ngram",
            BackendKind::External => "external",
        }
    }
}

impl FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tfidf-cosine" => Ok(BackendKind::TfidfCosine),
            "char-ngram" => Ok(BackendKind::CharNgram),
            "external" => Ok(BackendKind::External),
            other => Err(format!(
                "unknown backend `{other}` (expected tfidf-cosine, char-ngram or external)"
            )),
        }
    }
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn validate_threshold(threshold: f64) -> Result<f64, BackendError> {
    if (0.0..=1.0).contains(&threshold) {
        Ok(threshold)
    } else {
        Err(BackendError::InvalidThreshold(threshold))
    }
}

/// Lexical candidate awaiting a relevance score.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub query_id: String,
    pub candidate_id: String,
    pub lexical_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredCandidate {
    pub query_id: String,
    pub candidate_id: String,
    pub lexical_score: f64,
    pub relevance_score: f64,
}

/// A pair the backend failed to score.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedPair {
    pub query_id: String,
    pub candidate_id: String,
    pub reason: String,
    #[serde(skip)]
    pub fatal: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RerankOutcome {
    pub retained: Vec<ScoredCandidate>,
    pub skipped: Vec<SkippedPair>,
}

/// Orders by relevance descending, then candidate id ascending.
pub fn relevance_order(a: &ScoredCandidate, b: &ScoredCandidate) -> Ordering {
    b.relevance_score
        .total_cmp(&a.relevance_score)
        .then_with(|| a.candidate_id.cmp(&b.candidate_id))
}

/// Scores every candidate and keeps those at or above `threshold`.
///
/// `text_of` resolves an id to its canonical claim text. Pairs the backend
/// cannot score are reported in [`RerankOutcome::skipped`], never scored 0.
pub fn rerank<'t, F>(
    candidates: &[Candidate],
    text_of: F,
    backend: &dyn Similarity,
    threshold: f64,
) -> RerankOutcome
where
    F: Fn(&str) -> Option<&'t str>,
{
    let mut outcome = RerankOutcome::default();
    for c in candidates {
        let (Some(a), Some(b)) = (text_of(&c.query_id), text_of(&c.candidate_id)) else {
            outcome.skipped.push(SkippedPair {
                query_id: c.query_id.clone(),
                candidate_id: c.candidate_id.clone(),
                reason: "unresolvable id".into(),
                fatal: false,
            });
            continue;
        };
        match backend.score_pair(a, b) {
            Ok(score) if score >= threshold => outcome.retained.push(ScoredCandidate {
                query_id: c.query_id.clone(),
                candidate_id: c.candidate_id.clone(),
                lexical_score: c.lexical_score,
                relevance_score: score,
            }),
            Ok(_) => {}
            Err(e) => outcome.skipped.push(SkippedPair {
                query_id: c.query_id.clone(),
                candidate_id: c.candidate_id.clone(),
                reason: e.to_string(),
                fatal: e.is_fatal(),
            }),
        }
    }
    outcome.retained.sort_by(relevance_order);
    outcome
}

/// Cosine similarity of two sparse vectors sorted by key.
///
/// The merge walks keys in ascending order, so the result is the same
/// whichever argument comes first.
pub(crate) fn sparse_cosine<K: Ord>(a: &[(K, f64)], b: &[(K, f64)]) -> f64 {
    let norm_a: f64 = a.iter().map(|(_, w)| w * w).sum();
    let norm_b: f64 = b.iter().map(|(_, w)| w * w).sum();
    if norm_a == 0.0 || norm_b == 0.0 {
        return 0.0;
    }
    let (mut i, mut j, mut dot) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                dot += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    (dot / (norm_a.sqrt() * norm_b.sqrt())).clamp(0.0, 1.0)
}
