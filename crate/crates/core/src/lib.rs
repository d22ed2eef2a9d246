//! Search engine and analytics for debunks of previously fact-checked claims.
//!
//! The pipeline runs in this order:
//!
//! 1. [`corpus`] parses line-delimited fact-check records and fills in missing
//!    language, modality and category metadata.
//! 2. [`normalize`] canonicalizes the many spellings of the virus name and
//!    tokenizes claims.
//! 3. [`index`] builds a BM25 Okapi inverted index for lexical candidate
//!    retrieval.
//! 4. [`rerank`] scores candidate pairs in `[0, 1]` with a pluggable
//!    similarity backend and applies the relevance threshold.
//! 5. [`dedup`] keeps pairs where a different organisation published the
//!    earlier debunk, reduces them one-to-one and clusters narratives.
//! 6. [`analytics`] turns the link set into the country, platform, modality,
//!    language, category and timing aggregates written by [`report`].

pub mod analytics;
pub mod categorize;
pub mod corpus;
pub mod dedup;
pub mod engine;
pub mod index;
pub mod normalize;
pub mod report;
pub mod rerank;
pub mod rules;

pub use analytics::{GapHistogram, TimelineEvent, TransitionTable};
pub use categorize::{Category, CategoryRules};
pub use corpus::{Corpus, DebunkRecord, LangCode, Modality, ParseIssue};
pub use dedup::{ClaimCluster, DedupConfig, DuplicateLink};
pub use engine::{QueryEngine, QueryHit};
pub use index::{Bm25Index, Bm25Params};
pub use normalize::{AliasSet, NormalizedClaim};
pub use rerank::{ScoredCandidate, Similarity};
