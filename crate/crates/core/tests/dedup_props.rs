mod common;

use std::collections::{BTreeSet, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use redebunk_core::corpus::parse_records_from_path;
use redebunk_core::dedup::{self, apply_constraints, find_duplicates, DedupConfig};
use redebunk_core::engine::Catalog;
use redebunk_core::rerank::{CharNgramBackend, ScoreError, TfidfCosineBackend};
use redebunk_core::{AliasSet, Bm25Params, Corpus, DebunkRecord, DuplicateLink, Similarity};

use common::{day, fixture_path, random_corpus, record};

fn catalog(records: Vec<DebunkRecord>) -> Catalog {
    Catalog::build(Corpus::new(records).unwrap(), AliasSet::default(), Bm25Params::default()).unwrap()
}

/// Scores every pair 1.
struct Always;

impl Similarity for Always {
    fn name(&self) -> String {
        "always".into()
    }
    fn score_pair(&self, _: &str, _: &str) -> Result<f64, ScoreError> {
        Ok(1.0)
    }
}

fn key(l: &DuplicateLink) -> (String, String) {
    (l.query_id.clone(), l.duplicate_id.clone())
}

#[test]
fn no_link_violates_the_constraints() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut pairs = 0;
    let mut same_day_pairs = 0;
    for _ in 0..4 {
        // A short date range makes same-day pairs common.
        let records = random_corpus(&mut rng, 60, 5);
        let n = records.len();
        pairs += n * (n - 1);
        same_day_pairs += records
            .iter()
            .flat_map(|a| records.iter().map(move |b| (a, b)))
            .filter(|(a, b)| a.id != b.id && a.debunk_date == b.debunk_date)
            .count();
        let cat = catalog(records);
        let config = DedupConfig {
            k: n,
            threshold: 0.0,
            jobs: 1,
        };
        let out = find_duplicates(&cat, &Always, &config).unwrap();
        assert!(!out.links.is_empty());
        for l in &out.links {
            let q = cat.corpus().get(&l.query_id).unwrap();
            let d = cat.corpus().get(&l.duplicate_id).unwrap();
            assert_ne!(q.organisation, d.organisation);
            assert!(d.debunk_date < q.debunk_date);
            assert_eq!(l.day_gap, (q.debunk_date - d.debunk_date).num_days());
            assert!(l.day_gap >= 1);
        }
    }
    assert!(pairs >= 10_000, "{pairs}");
    assert!(same_day_pairs > 1000, "{same_day_pairs}");
}

/// Every ordered pair that shares a token, meets the constraints and clears
/// the threshold.
fn brute_force(cat: &Catalog, backend: &dyn Similarity, threshold: f64) -> BTreeSet<(String, String)> {
    let mut out = BTreeSet::new();
    let records = cat.corpus().records();
    for (i, q) in records.iter().enumerate() {
        let qt: HashSet<&String> = cat.claims()[i].tokens.iter().collect();
        for (j, d) in records.iter().enumerate() {
            if i == j || !apply_constraints(q, d) {
                continue;
            }
            if !cat.claims()[j].tokens.iter().any(|t| qt.contains(t)) {
                continue;
            }
            let s = backend
                .score_pair(&cat.claims()[i].canonical_text, &cat.claims()[j].canonical_text)
                .unwrap();
            if dedup::round_score(s) >= threshold || s >= threshold {
                out.insert((q.id.clone(), d.id.clone()));
            }
        }
    }
    out
}

#[test]
fn full_depth_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5 {
        let records = random_corpus(&mut rng, 80, 60);
        let cat = catalog(records);
        let backend = TfidfCosineBackend::fit(cat.claims());
        let threshold = 0.6;
        let config = DedupConfig {
            k: cat.corpus().len(),
            threshold,
            jobs: 1,
        };
        let got: BTreeSet<_> = find_duplicates(&cat, &backend, &config)
            .unwrap()
            .links
            .iter()
            .map(key)
            .collect();
        assert_eq!(got, brute_force(&cat, &backend, threshold));
    }
}

#[test]
fn output_does_not_depend_on_record_order_or_jobs() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut records = random_corpus(&mut rng, 150, 90);
    let backend = CharNgramBackend::new(3);
    let config = DedupConfig {
        k: 10,
        threshold: 0.5,
        jobs: 1,
    };
    let base = find_duplicates(&catalog(records.clone()), &backend, &config).unwrap();
    assert!(!base.links.is_empty());
    for jobs in [2, 8] {
        let out = find_duplicates(&catalog(records.clone()), &backend, &DedupConfig { jobs, ..config }).unwrap();
        assert_eq!(out, base);
    }
    records.shuffle(&mut rng);
    let shuffled = find_duplicates(&catalog(records), &backend, &config).unwrap();
    assert_eq!(shuffled.links, base.links);
}

#[test]
fn raising_the_threshold_only_removes_links() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let cat = catalog(random_corpus(&mut rng, 120, 90));
    let backend = CharNgramBackend::new(3);
    let mut previous: Option<BTreeSet<(String, String)>> = None;
    for t in [0.0, 0.3, 0.5, 0.7, 0.8, 0.9, 1.0] {
        let links: BTreeSet<_> = find_duplicates(
            &cat,
            &backend,
            &DedupConfig {
                k: 50,
                threshold: t,
                jobs: 1,
            },
        )
        .unwrap()
        .links
        .iter()
        .map(key)
        .collect();
        if let Some(prev) = &previous {
            assert!(links.is_subset(prev), "threshold {t}");
        }
        previous = Some(links);
    }
}

#[test]
fn threshold_one_links_only_identical_claims() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut records = random_corpus(&mut rng, 100, 60);
    // plant exact copies under other organisations and later dates
    for i in 0..10 {
        let mut copy = records[i].clone();
        copy.id = format!("copy{i}");
        copy.organisation = "Copycat".into();
        copy.debunk_date = day(100 + i as i64);
        records.push(copy);
    }
    let cat = catalog(records);
    let out = find_duplicates(
        &cat,
        &CharNgramBackend::new(3),
        &DedupConfig {
            k: cat.corpus().len(),
            threshold: 1.0,
            jobs: 1,
        },
    )
    .unwrap();
    let text: HashMap<&str, &str> = cat
        .claims()
        .iter()
        .map(|c| (c.record_id.as_str(), c.canonical_text.as_str()))
        .collect();
    for l in &out.links {
        assert_eq!(text[l.query_id.as_str()], text[l.duplicate_id.as_str()]);
        assert_eq!(l.relevance_score, 1.0);
    }
    let got: HashSet<_> = out.links.iter().map(key).collect();
    for i in 0..10 {
        assert!(got.contains(&(format!("copy{i}"), format!("r{i:05}"))) || {
            // the original may share the copy's organisation by chance
            cat.corpus().get(&format!("r{i:05}")).unwrap().organisation == "Copycat"
        });
    }
}

#[test]
fn one_to_one_and_clusters_are_consistent() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let cat = catalog(random_corpus(&mut rng, 200, 120));
    let out = find_duplicates(
        &cat,
        &CharNgramBackend::new(3),
        &DedupConfig {
            k: 20,
            threshold: 0.5,
            jobs: 1,
        },
    )
    .unwrap();
    let links = &out.links;
    assert!(links.len() > 20);

    let queries: BTreeSet<&str> = links.iter().map(|l| l.query_id.as_str()).collect();
    let reduced = dedup::to_one_to_one(links);
    assert_eq!(reduced.len(), queries.len());
    for (q, best) in &reduced {
        for l in links.iter().filter(|l| &l.query_id == q) {
            assert!(l.relevance_score <= best.relevance_score);
            if l.relevance_score == best.relevance_score {
                assert!(l.day_gap <= best.day_gap);
            }
        }
    }

    let clusters = dedup::cluster(links, cat.corpus()).unwrap();
    let mut seen: HashMap<&str, usize> = HashMap::new();
    for c in &clusters {
        assert!(c.members.len() >= 2);
        for m in &c.members {
            assert!(seen.insert(m.as_str(), c.cluster_id).is_none(), "{m} in two clusters");
        }
    }
    let linked: BTreeSet<&str> = links
        .iter()
        .flat_map(|l| [l.query_id.as_str(), l.duplicate_id.as_str()])
        .collect();
    assert_eq!(linked, seen.keys().copied().collect());
    for l in links {
        assert_eq!(seen[l.query_id.as_str()], seen[l.duplicate_id.as_str()]);
    }
    let ids: Vec<usize> = clusters.iter().map(|c| c.cluster_id).collect();
    assert_eq!(ids, (1..=clusters.len()).collect::<Vec<_>>());
}

#[test]
fn same_day_records_never_link() {
    let records = vec![
        record("a", "vitamin c cures coronavirus", "AFP", day(10)),
        record("b", "vitamin c cures coronavirus", "Boom", day(10)),
        record("c", "vitamin c cures coronavirus", "AFP", day(20)),
    ];
    let cat = catalog(records);
    let out = find_duplicates(&cat, &Always, &DedupConfig::default()).unwrap();
    let got: Vec<_> = out.links.iter().map(key).collect();
    // c and a share an organisation; a and b share a day
    assert_eq!(got, vec![("c".to_string(), "b".to_string())]);
}

/// Replays the pairwise judgments recorded in the vitamin C fixture: listed
/// query/duplicate pairs score 0.95, everything else 0.1.
struct RecordedJudgments(HashSet<(String, String)>);

impl Similarity for RecordedJudgments {
    fn name(&self) -> String {
        "recorded".into()
    }
    fn score_pair(&self, a: &str, b: &str) -> Result<f64, ScoreError> {
        let hit = self.0.contains(&(a.to_string(), b.to_string())) || self.0.contains(&(b.to_string(), a.to_string()));
        Ok(if hit { 0.95 } else { 0.1 })
    }
}

#[test]
fn vitamin_c_links_under_recorded_judgments() {
    let (records, _) = parse_records_from_path(&fixture_path("vitamin_c.jsonl")).unwrap();
    let cat = catalog(records);
    let text = |id: &str| cat.canonical_text(id).unwrap().to_string();
    let mut expected = BTreeSet::new();
    let mut judged = HashSet::new();
    for (q, dups) in [("t1-q1", 1..=7), ("t1-q2", 8..=10)] {
        for i in dups {
            let d = format!("t1-d{i}");
            judged.insert((text(q), text(&d)));
            expected.insert((q.to_string(), d));
        }
    }
    let out = find_duplicates(&cat, &RecordedJudgments(judged), &DedupConfig::default()).unwrap();
    // t1-d1 canonicalizes to the first query's own text, so it picks up links
    // of its own; only the two queries' link sets are fixed by the table.
    let got: BTreeSet<_> = out
        .links
        .iter()
        .filter(|l| l.query_id.starts_with("t1-q"))
        .map(key)
        .collect();
    assert_eq!(got, expected);
}

#[test]
fn vitamin_c_char_ngram_links_respect_constraints() {
    let (records, _) = parse_records_from_path(&fixture_path("vitamin_c.jsonl")).unwrap();
    let cat = catalog(records);
    let out = find_duplicates(&cat, &CharNgramBackend::new(3), &DedupConfig::default()).unwrap();
    for l in &out.links {
        let q = cat.corpus().get(&l.query_id).unwrap();
        let d = cat.corpus().get(&l.duplicate_id).unwrap();
        assert!(apply_constraints(q, d));
    }
    // "Vitamin C can cure COVID-19." canonicalizes to the query text itself.
    assert!(out.links.iter().any(|l| l.query_id == "t1-q1" && l.duplicate_id == "t1-d1"));
}

#[test]
fn jobs_must_be_positive() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let cat = catalog(random_corpus(&mut rng, 5, 5));
    let config = DedupConfig {
        jobs: 0,
        ..DedupConfig::default()
    };
    assert!(find_duplicates(&cat, &Always, &config).is_err());
    let bad = DedupConfig {
        threshold: 1.01,
        ..DedupConfig::default()
    };
    assert!(find_duplicates(&cat, &Always, &bad).is_err());
    let _ = rng.gen::<u8>();
}
