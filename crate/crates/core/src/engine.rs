//! Indexed corpus and the ad-hoc claim search shared by the CLI `query`
//! command and the HTTP service.

use serde::Serialize;
use thiserror::Error;

use crate::corpus::{Corpus, DebunkRecord};
use crate::index::{Bm25Index, Bm25Params, IndexError};
use crate::normalize::{AliasSet, NormalizedClaim};
use crate::rerank::{self, Candidate, Similarity};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error("index does not match corpus: {0}")]
    IndexMismatch(String),
    #[error("threshold {0} is outside [0, 1]")]
    InvalidThreshold(f64),
    #[error("backend failed: {0}")]
    Backend(String),
}

/// A corpus together with its normalized claims and BM25 index. Claim `i`
/// and index ordinal `i` both belong to `corpus.records()[i]`.
#[derive(Debug, Clone)]
pub struct Catalog {
    corpus: Corpus,
    claims: Vec<NormalizedClaim>,
    index: Bm25Index,
    aliases: AliasSet,
}

impl Catalog {
    pub fn build(corpus: Corpus, aliases: AliasSet, params: Bm25Params) -> Result<Self, EngineError> {
        let claims: Vec<NormalizedClaim> = corpus
            .records()
            .iter()
            .map(|r| aliases.normalize_claim(r))
            .collect();
        let index = Bm25Index::build(&claims, params)?;
        Ok(Self {
            corpus,
            claims,
            index,
            aliases,
        })
    }

    /// Pairs a corpus with a previously persisted index.
    pub fn with_index(corpus: Corpus, aliases: AliasSet, index: Bm25Index) -> Result<Self, EngineError> {
        if index.n_docs() != corpus.len() {
            return Err(EngineError::IndexMismatch(format!(
                "index has {} documents, corpus has {}",
                index.n_docs(),
                corpus.len()
            )));
        }
        let claims: Vec<NormalizedClaim> = corpus
            .records()
            .iter()
            .map(|r| aliases.normalize_claim(r))
            .collect();
        for (i, claim) in claims.iter().enumerate() {
            if index.doc_id(i) != claim.record_id || index.doc_len(i) as usize != claim.tokens.len() {
                return Err(EngineError::IndexMismatch(format!(
                    "document {i} is `{}` in the index but `{}` in the corpus",
                    index.doc_id(i),
                    claim.record_id
                )));
            }
        }
        Ok(Self {
            corpus,
            claims,
            index,
            aliases,
        })
    }

    pub fn corpus(&self) -> &Corpus {
        &self.corpus
    }

    pub fn claims(&self) -> &[NormalizedClaim] {
        &self.claims
    }

    pub fn index(&self) -> &Bm25Index {
        &self.index
    }

    pub fn aliases(&self) -> &AliasSet {
        &self.aliases
    }

    pub fn record(&self, ord: usize) -> &DebunkRecord {
        &self.corpus.records()[ord]
    }

    pub fn canonical_text(&self, id: &str) -> Option<&str> {
        self.corpus
            .position(id)
            .map(|i| self.claims[i].canonical_text.as_str())
    }
}

/// One prior debunk matching an ad-hoc query.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryHit {
    pub id: String,
    pub claim: String,
    pub org: String,
    pub date: String,
    pub lang: String,
    pub url: String,
    pub score: f64,
}

/// Searches a catalog for debunks of a new claim.
pub struct QueryEngine {
    catalog: Catalog,
    backend: Box<dyn Similarity>,
}

impl QueryEngine {
    pub fn new(catalog: Catalog, backend: Box<dyn Similarity>) -> Self {
        Self { catalog, backend }
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn backend_name(&self) -> String {
        self.backend.name()
    }

    /// Canonicalizes `text`, retrieves the top `k` lexical candidates and
    /// keeps those whose relevance is at least `threshold`, best first.
    ///
    /// Unlike duplicate detection there are no organisation or date
    /// constraints: the query is a new claim, not a corpus record.
    pub fn query(&self, text: &str, k: usize, threshold: f64) -> Result<Vec<QueryHit>, EngineError> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(EngineError::InvalidThreshold(threshold));
        }
        let canonical = self.catalog.aliases.canonical_text(text);
        let tokens = crate::normalize::tokenize(&canonical);
        let hits = self.catalog.index.search(&tokens, k)?;
        const QUERY_ID: &str = "\u{0}query";
        let candidates: Vec<Candidate> = hits
            .iter()
            .map(|h| Candidate {
                query_id: QUERY_ID.to_string(),
                candidate_id: self.catalog.index.doc_id(h.doc).to_string(),
                lexical_score: h.score,
            })
            .collect();
        let outcome = rerank::rerank(
            &candidates,
            |id| {
                if id == QUERY_ID {
                    Some(canonical.as_str())
                } else {
                    self.catalog.canonical_text(id)
                }
            },
            self.backend.as_ref(),
            threshold,
        );
        if let Some(fatal) = outcome.skipped.iter().find(|s| s.fatal) {
            return Err(EngineError::Backend(fatal.reason.clone()));
        }
        Ok(outcome
            .retained
            .into_iter()
            .filter_map(|s| self.catalog.corpus.get(&s.candidate_id).map(|r| (r, s.relevance_score)))
            .map(|(r, score)| QueryHit {
                id: r.id.clone(),
                claim: r.claim_text.clone(),
                org: r.organisation.clone(),
                date: r.debunk_date.format("%Y-%m-%d").to_string(),
                lang: r
                    .language
                    .as_ref()
                    .map(|l| l.to_string())
                    .unwrap_or_else(|| "und".into()),
                url: r.url.clone(),
                score,
            })
            .collect())
    }
}
