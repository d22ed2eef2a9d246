//! Duplicate-debunk detection, one-to-one reduction and narrative clustering.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::atomic::{AtomicBool, Ordering as AtomicOrdering};

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, DebunkRecord};
use crate::engine::Catalog;
use crate::index::{IndexError, DEFAULT_CANDIDATE_DEPTH};
use crate::rerank::{self, Candidate, Similarity, SkippedPair, DEFAULT_THRESHOLD};

#[derive(Debug, Error)]
pub enum DedupError {
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error("threshold {0} is outside [0, 1]")]
    InvalidThreshold(f64),
    #[error("jobs must be at least 1")]
    InvalidJobs,
    #[error("similarity backend failed: {0}")]
    Backend(String),
    #[error("link refers to unknown record `{0}`")]
    UnknownRecord(String),
    #[error("worker pool: {0}")]
    Pool(String),
}

/// A query debunk and an earlier debunk of a similar claim by another
/// organisation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DuplicateLink {
    pub query_id: String,
    pub duplicate_id: String,
    #[serde(rename = "score")]
    pub relevance_score: f64,
    pub day_gap: i64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DedupConfig {
    /// Lexical candidates retrieved per query.
    pub k: usize,
    pub threshold: f64,
    /// Worker threads. Output does not depend on this.
    pub jobs: usize,
}

impl Default for DedupConfig {
    fn default() -> Self {
        Self {
            k: DEFAULT_CANDIDATE_DEPTH,
            threshold: DEFAULT_THRESHOLD,
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DedupOutput {
    pub links: Vec<DuplicateLink>,
    /// Pairs the backend could not score.
    pub skipped: Vec<SkippedPair>,
}

/// True iff the organisations differ and `candidate` was published strictly
/// before `query`.
pub fn apply_constraints(query: &DebunkRecord, candidate: &DebunkRecord) -> bool {
    query.organisation != candidate.organisation && candidate.debunk_date < query.debunk_date
}

pub fn day_gap(query: NaiveDate, duplicate: NaiveDate) -> i64 {
    (query - duplicate).num_days()
}

/// Rounds half-to-even at six decimal places, matching the link file format.
pub fn round_score(score: f64) -> f64 {
    format!("{score:.6}").parse().expect("formatted float parses")
}

/// Link order: query id, then relevance descending, then duplicate id.
pub fn link_order(a: &DuplicateLink, b: &DuplicateLink) -> Ordering {
    a.query_id
        .cmp(&b.query_id)
        .then_with(|| b.relevance_score.total_cmp(&a.relevance_score))
        .then_with(|| a.duplicate_id.cmp(&b.duplicate_id))
}

/// Finds every earlier debunk of a similar claim by another organisation.
///
/// For each record the top `k` lexical candidates (excluding the record
/// itself) are kept if they satisfy [`apply_constraints`] and score at least
/// `threshold` with `backend`. Stored scores are rounded to six decimals.
pub fn find_duplicates(
    catalog: &Catalog,
    backend: &dyn Similarity,
    config: &DedupConfig,
) -> Result<DedupOutput, DedupError> {
    if !(0.0..=1.0).contains(&config.threshold) {
        return Err(DedupError::InvalidThreshold(config.threshold));
    }
    if config.k < 1 {
        return Err(IndexError::InvalidK.into());
    }
    if config.jobs < 1 {
        return Err(DedupError::InvalidJobs);
    }
    let failed = AtomicBool::new(false);
    let per_query = |ord: usize| -> Result<(Vec<DuplicateLink>, Vec<SkippedPair>), DedupError> {
        if failed.load(AtomicOrdering::Relaxed) {
            return Ok(Default::default());
        }
        let query = catalog.record(ord);
        let tokens = &catalog.claims()[ord].tokens;
        let hits = catalog.index().search_excluding(tokens, config.k, Some(ord))?;
        // Constraints and threshold are independent filters; checking the
        // constraints first saves backend calls.
        let candidates: Vec<Candidate> = hits
            .iter()
            .filter(|h| apply_constraints(query, catalog.record(h.doc)))
            .map(|h| Candidate {
                query_id: query.id.clone(),
                candidate_id: catalog.record(h.doc).id.clone(),
                lexical_score: h.score,
            })
            .collect();
        let outcome = rerank::rerank(
            &candidates,
            |id| catalog.canonical_text(id),
            backend,
            config.threshold,
        );
        if let Some(fatal) = outcome.skipped.iter().find(|s| s.fatal) {
            failed.store(true, AtomicOrdering::Relaxed);
            return Err(DedupError::Backend(fatal.reason.clone()));
        }
        let links = outcome
            .retained
            .into_iter()
            .map(|s| {
                let dup = catalog
                    .corpus()
                    .get(&s.candidate_id)
                    .expect("candidate comes from the catalog");
                DuplicateLink {
                    query_id: s.query_id,
                    duplicate_id: s.candidate_id,
                    relevance_score: round_score(s.relevance_score),
                    day_gap: day_gap(query.debunk_date, dup.debunk_date),
                }
            })
            .collect();
        Ok((links, outcome.skipped))
    };

    let n = catalog.corpus().len();
    let results: Vec<Result<_, DedupError>> = if config.jobs == 1 {
        (0..n).map(per_query).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .map_err(|e| DedupError::Pool(e.to_string()))?;
        pool.install(|| (0..n).into_par_iter().map(per_query).collect())
    };

    let mut out = DedupOutput::default();
    for r in results {
        let (links, skipped) = r?;
        out.links.extend(links);
        out.skipped.extend(skipped);
    }
    out.links.sort_by(link_order);
    out.skipped
        .sort_by(|a, b| (&a.query_id, &a.candidate_id).cmp(&(&b.query_id, &b.candidate_id)));
    Ok(out)
}

/// Keeps one link per query: highest score, then the earliest duplicate
/// (largest day gap), then the smallest duplicate id.
pub fn to_one_to_one(links: &[DuplicateLink]) -> BTreeMap<String, DuplicateLink> {
    let mut best: BTreeMap<String, DuplicateLink> = BTreeMap::new();
    for link in links {
        match best.get(&link.query_id) {
            Some(current) if !beats(link, current) => {}
            _ => {
                best.insert(link.query_id.clone(), link.clone());
            }
        }
    }
    best
}

fn beats(a: &DuplicateLink, b: &DuplicateLink) -> bool {
    a.relevance_score
        .total_cmp(&b.relevance_score)
        .then_with(|| a.day_gap.cmp(&b.day_gap))
        .then_with(|| b.duplicate_id.cmp(&a.duplicate_id))
        == Ordering::Greater
}

/// A connected component of the undirected link graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClaimCluster {
    pub cluster_id: usize,
    /// Ordered by debunk date, then id.
    pub members: Vec<String>,
    pub earliest_date: NaiveDate,
    pub languages: BTreeSet<String>,
    pub countries: BTreeSet<String>,
}

struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            Ordering::Less => self.parent[ra] = rb,
            Ordering::Greater => self.parent[rb] = ra,
            Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

/// Groups linked records into narrative clusters.
///
/// Clusters are ordered by earliest member date, then size descending, then
/// first member id, and numbered from 1 in that order.
pub fn cluster(links: &[DuplicateLink], corpus: &Corpus) -> Result<Vec<ClaimCluster>, DedupError> {
    let mut slot: HashMap<&str, usize> = HashMap::new();
    let mut ids: Vec<&str> = Vec::new();
    for link in links {
        for id in [link.query_id.as_str(), link.duplicate_id.as_str()] {
            if corpus.get(id).is_none() {
                return Err(DedupError::UnknownRecord(id.to_string()));
            }
            slot.entry(id).or_insert_with(|| {
                ids.push(id);
                ids.len() - 1
            });
        }
    }
    let mut sets = DisjointSet::new(ids.len());
    for link in links {
        sets.union(slot[link.query_id.as_str()], slot[link.duplicate_id.as_str()]);
    }
    let mut groups: BTreeMap<usize, Vec<&DebunkRecord>> = BTreeMap::new();
    for (i, id) in ids.iter().enumerate() {
        let root = sets.find(i);
        groups.entry(root).or_default().push(corpus.get(id).expect("checked above"));
    }
    let mut clusters: Vec<ClaimCluster> = groups
        .into_values()
        .filter(|members| members.len() >= 2)
        .map(|mut members| {
            members.sort_by(|a, b| a.debunk_date.cmp(&b.debunk_date).then_with(|| a.id.cmp(&b.id)));
            ClaimCluster {
                cluster_id: 0,
                earliest_date: members[0].debunk_date,
                languages: members
                    .iter()
                    .filter_map(|r| r.language.as_ref().map(|l| l.to_string()))
                    .collect(),
                countries: members.iter().flat_map(|r| r.countries.iter().cloned()).collect(),
                members: members.iter().map(|r| r.id.clone()).collect(),
            }
        })
        .collect();
    clusters.sort_by(|a, b| {
        a.earliest_date
            .cmp(&b.earliest_date)
            .then_with(|| b.members.len().cmp(&a.members.len()))
            .then_with(|| a.members[0].cmp(&b.members[0]))
    });
    for (i, c) in clusters.iter_mut().enumerate() {
        c.cluster_id = i + 1;
    }
    Ok(clusters)
}
