//! Aggregates over a corpus and its duplicate links.
//!
//! Transition tables pair the query side (`to`) with the duplicate side
//! (`from`): the duplicate was published first, so a cell `India <- United
//! States` counts narratives debunked in the United States before India.
//! Multi-valued fields contribute their first-listed value, so every link
//! adds exactly one cell or one `undefined` count.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::hash::Hash;

use chrono::NaiveDate;
use serde::Serialize;
use thiserror::Error;

use crate::categorize::Category;
use crate::corpus::{Corpus, DebunkRecord, Modality};
use crate::dedup::{ClaimCluster, DuplicateLink};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnalyticsError {
    #[error("link refers to unknown record `{0}`")]
    UnknownRecord(String),
    #[error("day gap {0} is below 1")]
    InvalidGap(i64),
    #[error("bin width must be at least 1 day")]
    InvalidBinWidth,
    #[error("a timeline needs at least two records, got {0}")]
    ClusterTooSmall(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Dimension {
    Country,
    Platform,
    Modality,
    Language,
}

impl Dimension {
    /// Representative value of `record` on this dimension, if defined.
    pub fn value(self, record: &DebunkRecord) -> Option<String> {
        match self {
            Dimension::Country => record.representative_country().map(str::to_string),
            Dimension::Platform => record.representative_platform().map(str::to_string),
            Dimension::Modality => record
                .modality
                .filter(|m| *m != Modality::Unknown)
                .map(|m| m.as_str().to_string()),
            Dimension::Language => record
                .language
                .as_ref()
                .filter(|l| !l.is_undetermined())
                .map(|l| l.to_string()),
        }
    }
}

/// Counts of `(to, from)` value pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TransitionTable {
    pub dimension: Dimension,
    pub counts: BTreeMap<(String, String), u64>,
}

impl TransitionTable {
    pub fn new(dimension: Dimension) -> Self {
        Self {
            dimension,
            counts: BTreeMap::new(),
        }
    }

    pub fn add(&mut self, to: String, from: String) {
        *self.counts.entry((to, from)).or_insert(0) += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn get(&self, to: &str, from: &str) -> u64 {
        self.counts
            .get(&(to.to_string(), from.to_string()))
            .copied()
            .unwrap_or(0)
    }
}

/// A transition table plus the links that had no value on either side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Transitions {
    pub table: TransitionTable,
    pub undefined: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountryTransitions {
    pub same: TransitionTable,
    pub diff: TransitionTable,
    pub undefined: u64,
}

fn resolve<'c>(corpus: &'c Corpus, id: &str) -> Result<&'c DebunkRecord, AnalyticsError> {
    corpus
        .get(id)
        .ok_or_else(|| AnalyticsError::UnknownRecord(id.to_string()))
}

fn pairs<'a, I>(
    corpus: &Corpus,
    links: I,
    dimension: Dimension,
) -> Result<(Vec<(String, String)>, u64), AnalyticsError>
where
    I: IntoIterator<Item = &'a DuplicateLink>,
{
    let mut out = Vec::new();
    let mut undefined = 0;
    for link in links {
        let q = resolve(corpus, &link.query_id)?;
        let d = resolve(corpus, &link.duplicate_id)?;
        match (dimension.value(q), dimension.value(d)) {
            (Some(to), Some(from)) => out.push((to, from)),
            _ => undefined += 1,
        }
    }
    Ok((out, undefined))
}

pub fn transitions<'a, I>(corpus: &Corpus, links: I, dimension: Dimension) -> Result<Transitions, AnalyticsError>
where
    I: IntoIterator<Item = &'a DuplicateLink>,
{
    let (pairs, undefined) = pairs(corpus, links, dimension)?;
    let mut table = TransitionTable::new(dimension);
    for (to, from) in pairs {
        table.add(to, from);
    }
    Ok(Transitions { table, undefined })
}

/// Splits country transitions into same-country and cross-country tables.
pub fn country_transitions<'a, I>(corpus: &Corpus, links: I) -> Result<CountryTransitions, AnalyticsError>
where
    I: IntoIterator<Item = &'a DuplicateLink>,
{
    let (pairs, undefined) = pairs(corpus, links, Dimension::Country)?;
    let mut same = TransitionTable::new(Dimension::Country);
    let mut diff = TransitionTable::new(Dimension::Country);
    for (to, from) in pairs {
        if to == from {
            same.add(to, from);
        } else {
            diff.add(to, from);
        }
    }
    Ok(CountryTransitions {
        same,
        diff,
        undefined,
    })
}

pub fn platform_transitions<'a, I>(corpus: &Corpus, links: I) -> Result<Transitions, AnalyticsError>
where
    I: IntoIterator<Item = &'a DuplicateLink>,
{
    transitions(corpus, links, Dimension::Platform)
}

pub fn modality_transitions<'a, I>(corpus: &Corpus, links: I) -> Result<Transitions, AnalyticsError>
where
    I: IntoIterator<Item = &'a DuplicateLink>,
{
    transitions(corpus, links, Dimension::Modality)
}

pub fn language_pairs<'a, I>(corpus: &Corpus, links: I) -> Result<Transitions, AnalyticsError>
where
    I: IntoIterator<Item = &'a DuplicateLink>,
{
    transitions(corpus, links, Dimension::Language)
}

/// Weekly (by default) histogram of day gaps. Bin `i` (from 0) counts gaps in
/// `[i·w + 1, (i + 1)·w]`, so the first bin is "one week or less".
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GapHistogram {
    pub bin_width_days: u32,
    pub bins: Vec<u64>,
}

impl GapHistogram {
    pub fn total(&self) -> u64 {
        self.bins.iter().sum()
    }

    /// Inclusive day range covered by bin `i`.
    pub fn bin_range(&self, i: usize) -> (u64, u64) {
        let w = u64::from(self.bin_width_days);
        (i as u64 * w + 1, (i as u64 + 1) * w)
    }
}

pub fn gap_histogram<'a, I>(links: I, bin_width: u32) -> Result<GapHistogram, AnalyticsError>
where
    I: IntoIterator<Item = &'a DuplicateLink>,
{
    if bin_width < 1 {
        return Err(AnalyticsError::InvalidBinWidth);
    }
    let mut bins: Vec<u64> = Vec::new();
    for link in links {
        if link.day_gap < 1 {
            return Err(AnalyticsError::InvalidGap(link.day_gap));
        }
        let i = ((link.day_gap - 1) / i64::from(bin_width)) as usize;
        if bins.len() <= i {
            bins.resize(i + 1, 0);
        }
        bins[i] += 1;
    }
    Ok(GapHistogram {
        bin_width_days: bin_width,
        bins,
    })
}

/// Query ids none of whose duplicates share the query's language.
///
/// Takes the full one-to-many link set. Queries whose own language is
/// undetermined are left out; a duplicate with an undetermined language
/// never counts as sharing.
pub fn crosslingual_gap(corpus: &Corpus, links: &[DuplicateLink]) -> Result<(usize, Vec<String>), AnalyticsError> {
    let mut shares: BTreeMap<&str, bool> = BTreeMap::new();
    for link in links {
        let q = resolve(corpus, &link.query_id)?;
        let d = resolve(corpus, &link.duplicate_id)?;
        let Some(ql) = Dimension::Language.value(q) else {
            continue;
        };
        let same = Dimension::Language.value(d).as_deref() == Some(ql.as_str());
        *shares.entry(link.query_id.as_str()).or_insert(false) |= same;
    }
    let ids: Vec<String> = shares
        .into_iter()
        .filter(|(_, shared)| !shared)
        .map(|(id, _)| id.to_string())
        .collect();
    Ok((ids.len(), ids))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Share<K> {
    pub key: K,
    pub count: u64,
    pub proportion: f64,
}

/// Counts and proportions of each category over `records`, largest first.
pub fn category_distribution<'a, I>(records: I) -> Vec<Share<Category>>
where
    I: IntoIterator<Item = &'a DebunkRecord>,
{
    let mut counts: HashMap<Category, u64> = HashMap::new();
    for r in records {
        *counts.entry(r.category.unwrap_or(Category::Other)).or_insert(0) += 1;
    }
    shares(counts)
}

/// `counts` as shares of their total, ordered like [`top_n`].
pub fn shares<K: Ord + Clone + Hash>(counts: HashMap<K, u64>) -> Vec<Share<K>> {
    let total: u64 = counts.values().sum();
    let n = counts.len();
    top_n(counts, n)
        .into_iter()
        .map(|(key, count)| Share {
            key,
            count,
            proportion: count as f64 / total as f64,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CategoryGap {
    pub query_id: String,
    pub duplicate_id: String,
    pub category: Category,
    pub day_gap: i64,
}

/// One `(category, day gap)` point per link, categorized by the query claim.
pub fn category_gap_scatter<'a, I>(corpus: &Corpus, links: I) -> Result<Vec<CategoryGap>, AnalyticsError>
where
    I: IntoIterator<Item = &'a DuplicateLink>,
{
    links
        .into_iter()
        .map(|link| {
            let q = resolve(corpus, &link.query_id)?;
            resolve(corpus, &link.duplicate_id)?;
            Ok(CategoryGap {
                query_id: link.query_id.clone(),
                duplicate_id: link.duplicate_id.clone(),
                category: q.category.unwrap_or(Category::Other),
                day_gap: link.day_gap,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TimelineEvent {
    pub record_id: String,
    pub date: NaiveDate,
    pub organisation: String,
    pub language: String,
    pub countries: Vec<String>,
    pub platforms: Vec<String>,
    pub modality: String,
    pub claim: String,
}

/// Debunks of one narrative in publication order (ties by organisation).
pub fn timeline(cluster: &ClaimCluster, corpus: &Corpus) -> Result<Vec<TimelineEvent>, AnalyticsError> {
    if cluster.members.len() < 2 {
        return Err(AnalyticsError::ClusterTooSmall(cluster.members.len()));
    }
    let mut events = cluster
        .members
        .iter()
        .map(|id| {
            let r = resolve(corpus, id)?;
            Ok(TimelineEvent {
                record_id: r.id.clone(),
                date: r.debunk_date,
                organisation: r.organisation.clone(),
                language: r
                    .language
                    .as_ref()
                    .map(|l| l.to_string())
                    .unwrap_or_else(|| "und".into()),
                countries: r.countries.clone(),
                platforms: r.platforms.clone(),
                modality: r.modality.unwrap_or(Modality::Unknown).to_string(),
                claim: r.claim_text.clone(),
            })
        })
        .collect::<Result<Vec<_>, AnalyticsError>>()?;
    events.sort_by(|a, b| {
        a.date
            .cmp(&b.date)
            .then_with(|| a.organisation.cmp(&b.organisation))
            .then_with(|| a.record_id.cmp(&b.record_id))
    });
    Ok(events)
}

/// The `n` largest counts, ties by ascending key.
pub fn top_n<K: Ord + Clone>(counts: impl IntoIterator<Item = (K, u64)>, n: usize) -> Vec<(K, u64)> {
    let mut all: Vec<(K, u64)> = counts.into_iter().collect();
    all.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    all.truncate(n);
    all
}

pub type Counts = HashMap<String, u64>;

/// Per-query counts on the query side: representative country and
/// organisation of each distinct query claim.
pub fn query_side_counts<'a, I>(corpus: &Corpus, query_ids: I) -> Result<(Counts, Counts), AnalyticsError>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut countries = HashMap::new();
    let mut orgs = HashMap::new();
    let distinct: BTreeSet<&str> = query_ids.into_iter().collect();
    for id in distinct {
        let r = resolve(corpus, id)?;
        let country = r.representative_country().unwrap_or("undefined").to_string();
        *countries.entry(country).or_insert(0) += 1;
        *orgs.entry(r.organisation.clone()).or_insert(0) += 1;
    }
    Ok((countries, orgs))
}
