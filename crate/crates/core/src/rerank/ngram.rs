use std::collections::HashMap;

use super::{sparse_cosine, ScoreError, Similarity};

/// Cosine of character n-gram count vectors.
///
/// Whitespace runs collapse to one space and the text is trimmed before
/// n-grams are taken. A text shorter than `n` characters is a single gram.
/// Identical texts score exactly 1; distinct texts always score below 1, so a
/// threshold of 1 admits only exact matches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CharNgramBackend {
    n: usize,
}

impl Default for CharNgramBackend {
    fn default() -> Self {
        Self { n: 3 }
    }
}

impl CharNgramBackend {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "n-gram size must be at least 1");
        Self { n }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn vector(&self, text: &str) -> Vec<(String, f64)> {
        let chars: Vec<char> = text
            .split_whitespace()
            .flat_map(|w| std::iter::once(' ').chain(w.chars()))
            .skip(1)
            .collect();
        let mut counts: HashMap<String, f64> = HashMap::new();
        if chars.is_empty() {
            return Vec::new();
        }
        if chars.len() < self.n {
            counts.insert(chars.iter().collect(), 1.0);
        } else {
            for w in chars.windows(self.n) {
                *counts.entry(w.iter().collect()).or_insert(0.0) += 1.0;
            }
        }
        let mut v: Vec<(String, f64)> = counts.into_iter().collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }
}

impl Similarity for CharNgramBackend {
    fn name(&self) -> String {
        format!("char-ngram(n={})", self.n)
    }

    fn score_pair(&self, a: &str, b: &str) -> Result<f64, ScoreError> {
        if a == b {
            return Ok(1.0);
        }
        let cos = sparse_cosine(&self.vector(a), &self.vector(b));
        Ok(cos.min(1.0 - f64::EPSILON))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalize::{AliasSet, NormalizedClaim};
    use proptest::prelude::*;

    fn score(a: &str, b: &str) -> f64 {
        CharNgramBackend::default().score_pair(a, b).unwrap()
    }

    #[test]
    fn self_similarity() {
        assert_eq!(score("vitamin c", "vitamin c"), 1.0);
        assert_eq!(score("x", "x"), 1.0);
    }

    #[test]
    fn disjoint_trigrams() {
        assert_eq!(score("abc", "xyz"), 0.0);
    }

    #[test]
    fn vitamin_c_pair_identical_after_canonicalization() {
        let aliases = AliasSet::default();
        let canon = |t: &str| -> NormalizedClaim {
            let r = crate::corpus::parse_records(
                format!(r#"{{"claim":{},"org":"o","countries":["x"],"date":"2020-01-01"}}"#, serde_json::to_string(t).unwrap())
                    .as_bytes(),
            )
            .unwrap()
            .0
            .remove(0);
            aliases.normalize_claim(&r)
        };
        let a = canon("Vitamin C can cure coronavirus.");
        let b = canon("Vitamin C can cure COVID-19.");
        assert_eq!(score(&a.canonical_text, &b.canonical_text), 1.0);
    }

    #[test]
    fn hand_computed_value() {
        // "abcd": abc, bcd ; "abce": abc, bce -> dot 1, norms sqrt2*sqrt2
        assert!((score("abcd", "abce") - 0.5).abs() < 1e-15);
    }

    #[test]
    fn distinct_texts_with_equal_vectors_stay_below_one() {
        // same gram multiset {ab, ba} with n = 2
        let b = CharNgramBackend::new(2);
        let s = b.score_pair("aba", "bab").unwrap();
        assert!(s < 1.0);
    }

    proptest! {
        #[test]
        fn in_unit_interval_and_symmetric(a in "\\PC{0,40}", b in "\\PC{0,40}", n in 1usize..5) {
            let backend = CharNgramBackend::new(n);
            let ab = backend.score_pair(&a, &b).unwrap();
            let ba = backend.score_pair(&b, &a).unwrap();
            prop_assert!((0.0..=1.0).contains(&ab));
            prop_assert_eq!(ab.to_bits(), ba.to_bits());
        }
    }
}
