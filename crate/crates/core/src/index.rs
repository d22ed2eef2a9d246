//! BM25 Okapi inverted index.
//!
//! For a query `q` and document `d`:
//!
//! ```text
//! score(q, d) = Σ_{t ∈ distinct(q)} idf(t) · f(t,d)·(k1 + 1) / (f(t,d) + k1·(1 − b + b·|d|/avgdl))
//! idf(t)      = ln(1 + (N − n(t) + 0.5) / (n(t) + 0.5))
//! ```
//!
//! where `f(t,d)` is the term frequency, `n(t)` the document frequency and `N`
//! the corpus size. The `ln(1 + …)` form keeps every idf positive, so scores
//! are never negative.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::io::{Read, Write};

use thiserror::Error;

use crate::normalize::NormalizedClaim;

/// Stage-one candidate depth used when nothing else is configured.
pub const DEFAULT_CANDIDATE_DEPTH: usize = 50;

const MAGIC: &[u8; 8] = b"RDBM25IX";
pub const FORMAT_VERSION: u8 = 1;

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("duplicate record id `{0}` in index input")]
    DuplicateId(String),
    #[error("document `{0}` is not in the index")]
    UnknownDoc(String),
    #[error("k must be at least 1")]
    InvalidK,
    #[error("invalid BM25 parameters k1={k1}, b={b}")]
    InvalidParams { k1: f64, b: f64 },
    #[error("index file I/O")]
    Io(#[from] std::io::Error),
    #[error("not an index file (bad magic header)")]
    BadMagic,
    #[error("unsupported index format version {found} (expected {FORMAT_VERSION})")]
    UnsupportedVersion { found: u8 },
    #[error("corrupt index file: {0}")]
    Corrupt(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Self { k1: 1.5, b: 0.75 }
    }
}

impl Bm25Params {
    pub fn validate(self) -> Result<Self, IndexError> {
        if self.k1.is_finite() && self.k1 >= 0.0 && (0.0..=1.0).contains(&self.b) {
            Ok(self)
        } else {
            Err(IndexError::InvalidParams {
                k1: self.k1,
                b: self.b,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Posting {
    pub doc: u32,
    pub tf: u32,
}

/// One search result: a document ordinal and its score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub doc: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bm25Index {
    doc_ids: Vec<String>,
    postings: HashMap<String, Vec<Posting>>,
    doc_len: Vec<u32>,
    avgdl: f64,
    params: Bm25Params,
}

impl Bm25Index {
    pub fn build(claims: &[NormalizedClaim], params: Bm25Params) -> Result<Self, IndexError> {
        Self::from_documents(
            claims.iter().map(|c| (c.record_id.as_str(), c.tokens.as_slice())),
            params,
        )
    }

    /// Builds from `(id, tokens)` pairs; document ordinals follow input order.
    pub fn from_documents<'a, I>(docs: I, params: Bm25Params) -> Result<Self, IndexError>
    where
        I: IntoIterator<Item = (&'a str, &'a [String])>,
    {
        let params = params.validate()?;
        let mut doc_ids = Vec::new();
        let mut doc_len = Vec::new();
        let mut seen = std::collections::HashSet::new();
        let mut postings: HashMap<String, Vec<Posting>> = HashMap::new();
        for (ord, (id, tokens)) in docs.into_iter().enumerate() {
            if !seen.insert(id.to_string()) {
                return Err(IndexError::DuplicateId(id.to_string()));
            }
            let ord = u32::try_from(ord).map_err(|_| IndexError::Corrupt("too many documents".into()))?;
            let mut tf: HashMap<&str, u32> = HashMap::new();
            for t in tokens {
                *tf.entry(t.as_str()).or_insert(0) += 1;
            }
            for (term, count) in tf {
                postings
                    .entry(term.to_string())
                    .or_default()
                    .push(Posting { doc: ord, tf: count });
            }
            doc_ids.push(id.to_string());
            doc_len.push(tokens.len() as u32);
        }
        let avgdl = mean_len(&doc_len);
        Ok(Self {
            doc_ids,
            postings,
            doc_len,
            avgdl,
            params,
        })
    }

    pub fn n_docs(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn avgdl(&self) -> f64 {
        self.avgdl
    }

    pub fn params(&self) -> Bm25Params {
        self.params
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn doc_id(&self, ord: usize) -> &str {
        &self.doc_ids[ord]
    }

    pub fn doc_len(&self, ord: usize) -> u32 {
        self.doc_len[ord]
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.postings.get(term).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.postings.keys().map(String::as_str)
    }

    pub fn position(&self, doc_id: &str) -> Option<usize> {
        self.doc_ids.iter().position(|d| d == doc_id)
    }

    pub fn idf(&self, term: &str) -> f64 {
        let n = self.n_docs() as f64;
        let df = self.postings(term).len() as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }

    fn term_weight(&self, idf: f64, tf: u32, ord: usize) -> f64 {
        let Bm25Params { k1, b } = self.params;
        let tf = f64::from(tf);
        let norm = 1.0 - b + b * f64::from(self.doc_len[ord]) / self.avgdl;
        idf * tf * (k1 + 1.0) / (tf + k1 * norm)
    }

    /// BM25 score of one indexed document against `query_tokens`.
    pub fn score(&self, query_tokens: &[String], doc_id: &str) -> Result<f64, IndexError> {
        let ord = self
            .position(doc_id)
            .ok_or_else(|| IndexError::UnknownDoc(doc_id.to_string()))?;
        Ok(self.score_ordinal(query_tokens, ord))
    }

    pub fn score_ordinal(&self, query_tokens: &[String], ord: usize) -> f64 {
        let mut score = 0.0;
        for term in distinct_sorted(query_tokens) {
            let list = self.postings(term);
            if let Ok(i) = list.binary_search_by_key(&(ord as u32), |p| p.doc) {
                score += self.term_weight(self.idf(term), list[i].tf, ord);
            }
        }
        score
    }

    /// Top `k` documents by score, highest first, ties by ascending doc id.
    /// Documents scoring zero are left out.
    pub fn search(&self, query_tokens: &[String], k: usize) -> Result<Vec<Hit>, IndexError> {
        self.search_excluding(query_tokens, k, None)
    }

    /// Like [`search`](Self::search) but never returns the `exclude` ordinal.
    pub fn search_excluding(
        &self,
        query_tokens: &[String],
        k: usize,
        exclude: Option<usize>,
    ) -> Result<Vec<Hit>, IndexError> {
        if k < 1 {
            return Err(IndexError::InvalidK);
        }
        let mut acc: HashMap<u32, f64> = HashMap::new();
        for term in distinct_sorted(query_tokens) {
            let list = self.postings(term);
            if list.is_empty() {
                continue;
            }
            let idf = self.idf(term);
            for p in list {
                *acc.entry(p.doc).or_insert(0.0) += self.term_weight(idf, p.tf, p.doc as usize);
            }
        }
        let mut hits: Vec<Hit> = acc
            .into_iter()
            .filter(|&(doc, score)| score > 0.0 && Some(doc as usize) != exclude)
            .map(|(doc, score)| Hit {
                doc: doc as usize,
                score,
            })
            .collect();
        let cmp = |a: &Hit, b: &Hit| -> Ordering {
            b.score
                .total_cmp(&a.score)
                .then_with(|| self.doc_ids[a.doc].cmp(&self.doc_ids[b.doc]))
        };
        if hits.len() > k {
            hits.select_nth_unstable_by(k - 1, cmp);
            hits.truncate(k);
        }
        hits.sort_unstable_by(cmp);
        Ok(hits)
    }

    /// Like [`search`](Self::search) but with document ids.
    pub fn search_ids(&self, query_tokens: &[String], k: usize) -> Result<Vec<(String, f64)>, IndexError> {
        Ok(self
            .search(query_tokens, k)?
            .into_iter()
            .map(|h| (self.doc_ids[h.doc].clone(), h.score))
            .collect())
    }

    /// Writes the versioned binary index format.
    ///
    /// Layout (little endian): 8-byte magic `RDBM25IX`, one version byte,
    /// `k1: f64`, `b: f64`, `n_docs: u32`, then per document a length-prefixed
    /// UTF-8 id and `doc_len: u32`, then `n_terms: u32` and per term (sorted)
    /// a length-prefixed term, `n_postings: u32` and `(doc: u32, tf: u32)` pairs.
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<(), IndexError> {
        out.write_all(MAGIC)?;
        out.write_all(&[FORMAT_VERSION])?;
        out.write_all(&self.params.k1.to_le_bytes())?;
        out.write_all(&self.params.b.to_le_bytes())?;
        write_u32(&mut out, self.doc_ids.len() as u32)?;
        for (id, len) in self.doc_ids.iter().zip(&self.doc_len) {
            write_str(&mut out, id)?;
            write_u32(&mut out, *len)?;
        }
        let mut terms: Vec<&String> = self.postings.keys().collect();
        terms.sort();
        write_u32(&mut out, terms.len() as u32)?;
        for term in terms {
            let list = &self.postings[term];
            write_str(&mut out, term)?;
            write_u32(&mut out, list.len() as u32)?;
            for p in list {
                write_u32(&mut out, p.doc)?;
                write_u32(&mut out, p.tf)?;
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut input: R) -> Result<Self, IndexError> {
        let mut magic = [0u8; 8];
        input.read_exact(&mut magic).map_err(|_| IndexError::BadMagic)?;
        if &magic != MAGIC {
            return Err(IndexError::BadMagic);
        }
        let mut version = [0u8; 1];
        input.read_exact(&mut version)?;
        if version[0] != FORMAT_VERSION {
            return Err(IndexError::UnsupportedVersion { found: version[0] });
        }
        let k1 = read_f64(&mut input)?;
        let b = read_f64(&mut input)?;
        let params = Bm25Params { k1, b }
            .validate()
            .map_err(|e| IndexError::Corrupt(e.to_string()))?;
        let n_docs = read_u32(&mut input)? as usize;
        let mut doc_ids = Vec::with_capacity(n_docs.min(1 << 20));
        let mut doc_len = Vec::with_capacity(n_docs.min(1 << 20));
        for _ in 0..n_docs {
            doc_ids.push(read_str(&mut input)?);
            doc_len.push(read_u32(&mut input)?);
        }
        let n_terms = read_u32(&mut input)? as usize;
        let mut postings = HashMap::with_capacity(n_terms.min(1 << 20));
        let mut tf_sum = vec![0u64; n_docs];
        for _ in 0..n_terms {
            let term = read_str(&mut input)?;
            let n = read_u32(&mut input)? as usize;
            let mut list = Vec::with_capacity(n.min(n_docs));
            for _ in 0..n {
                let doc = read_u32(&mut input)?;
                let tf = read_u32(&mut input)?;
                if doc as usize >= n_docs || tf == 0 {
                    return Err(IndexError::Corrupt(format!("bad posting for `{term}`")));
                }
                if list.last().is_some_and(|p: &Posting| p.doc >= doc) {
                    return Err(IndexError::Corrupt(format!("unsorted postings for `{term}`")));
                }
                tf_sum[doc as usize] += u64::from(tf);
                list.push(Posting { doc, tf });
            }
            if postings.insert(term.clone(), list).is_some() {
                return Err(IndexError::Corrupt(format!("repeated term `{term}`")));
            }
        }
        if tf_sum.iter().zip(&doc_len).any(|(s, l)| *s != u64::from(*l)) {
            return Err(IndexError::Corrupt("term frequencies do not sum to document lengths".into()));
        }
        let mut unique = std::collections::HashSet::new();
        if let Some(dup) = doc_ids.iter().find(|id| !unique.insert(id.as_str())) {
            return Err(IndexError::DuplicateId(dup.clone()));
        }
        let avgdl = mean_len(&doc_len);
        Ok(Self {
            doc_ids,
            postings,
            doc_len,
            avgdl,
            params,
        })
    }
}

fn mean_len(doc_len: &[u32]) -> f64 {
    if doc_len.is_empty() {
        0.0
    } else {
        doc_len.iter().map(|&l| u64::from(l)).sum::<u64>() as f64 / doc_len.len() as f64
    }
}

fn distinct_sorted(tokens: &[String]) -> Vec<&str> {
    let mut terms: Vec<&str> = tokens.iter().map(String::as_str).collect();
    terms.sort_unstable();
    terms.dedup();
    terms
}

fn write_u32<W: Write>(out: &mut W, v: u32) -> std::io::Result<()> {
    out.write_all(&v.to_le_bytes())
}

fn write_str<W: Write>(out: &mut W, s: &str) -> std::io::Result<()> {
    write_u32(out, s.len() as u32)?;
    out.write_all(s.as_bytes())
}

fn read_u32<R: Read>(input: &mut R) -> Result<u32, IndexError> {
    let mut buf = [0u8; 4];
    input.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_f64<R: Read>(input: &mut R) -> Result<f64, IndexError> {
    let mut buf = [0u8; 8];
    input.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

fn read_str<R: Read>(input: &mut R) -> Result<String, IndexError> {
    let len = read_u32(input)? as usize;
    let mut buf = Vec::new();
    input.take(len as u64).read_to_end(&mut buf)?;
    if buf.len() != len {
        return Err(IndexError::Corrupt("truncated string".into()));
    }
    String::from_utf8(buf).map_err(|_| IndexError::Corrupt("non UTF-8 string".into()))
}
