use std::collections::HashMap;

use super::{sparse_cosine, ScoreError, Similarity};
use crate::normalize::{tokenize, NormalizedClaim};

/// Cosine of TF-IDF vectors with idf fitted on a corpus.
///
/// `idf(t) = ln((1 + N) / (1 + df(t))) + 1`, which is positive for every
/// term, including terms the corpus never saw (`df = 0`).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TfidfCosineBackend {
    df: HashMap<String, u32>,
    n_docs: u32,
}

impl TfidfCosineBackend {
    pub fn fit(claims: &[NormalizedClaim]) -> Self {
        Self::fit_tokens(claims.iter().map(|c| c.tokens.as_slice()))
    }

    pub fn fit_tokens<'a, I>(docs: I) -> Self
    where
        I: IntoIterator<Item = &'a [String]>,
    {
        let mut df: HashMap<String, u32> = HashMap::new();
        let mut n_docs = 0;
        for tokens in docs {
            n_docs += 1;
            let mut distinct: Vec<&String> = tokens.iter().collect();
            distinct.sort_unstable();
            distinct.dedup();
            for t in distinct {
                *df.entry(t.clone()).or_insert(0) += 1;
            }
        }
        Self { df, n_docs }
    }

    pub fn idf(&self, term: &str) -> f64 {
        let df = self.df.get(term).copied().unwrap_or(0);
        ((1.0 + f64::from(self.n_docs)) / (1.0 + f64::from(df))).ln() + 1.0
    }

    pub fn vector(&self, text: &str) -> Vec<(String, f64)> {
        let mut tf: HashMap<String, f64> = HashMap::new();
        for t in tokenize(text) {
            *tf.entry(t).or_insert(0.0) += 1.0;
        }
        let mut v: Vec<(String, f64)> = tf
            .into_iter()
            .map(|(t, f)| {
                let w = f * self.idf(&t);
                (t, w)
            })
            .collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }
}

impl Similarity for TfidfCosineBackend {
    fn name(&self) -> String {
        "tfidf-cosine".into()
    }

    fn score_pair(&self, a: &str, b: &str) -> Result<f64, ScoreError> {
        if a == b {
            return Ok(1.0);
        }
        Ok(sparse_cosine(&self.vector(a), &self.vector(b)))
    }
}
