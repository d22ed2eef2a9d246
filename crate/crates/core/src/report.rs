//! On-disk formats: link files, dedup outputs and the analytics tables.
//!
//! Every writer produces the same bytes for the same inputs. Scores are
//! printed with six decimals, proportions likewise, and all tables are sorted.

use std::collections::{BTreeSet, HashMap};
use std::fs::{self, File};
use std::io::{self, BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytics::{
    self, AnalyticsError, CategoryGap, CountryTransitions, GapHistogram, Share, TimelineEvent, Transitions,
};
use crate::categorize::Category;
use crate::corpus::Corpus;
use crate::dedup::{self, ClaimCluster, DedupError, DuplicateLink};
use crate::rerank::SkippedPair;

pub const LINKS_FILE: &str = "links.jsonl";
pub const LINKS_CSV_FILE: &str = "links.csv";
pub const ONE_TO_ONE_FILE: &str = "one_to_one.jsonl";
pub const CLUSTERS_FILE: &str = "clusters.jsonl";
pub const SKIPPED_FILE: &str = "skipped_pairs.jsonl";
pub const MANIFEST_FILE: &str = "dedup_manifest.json";
pub const SUMMARY_FILE: &str = "summary.json";

pub const COUNTRY_DENOMINATOR: &str = "distinct query claims, by representative (first-listed) country";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}:{line}: {reason}")]
    BadLink { path: PathBuf, line: usize, reason: String },
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
    #[error(transparent)]
    Dedup(#[from] DedupError),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> ReportError + '_ {
    move |source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> ReportError + '_ {
    move |source| ReportError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

pub fn format_score(score: f64) -> String {
    format!("{score:.6}")
}

/// One link as a JSON object with a fixed key order and six-decimal score.
pub fn link_json(link: &DuplicateLink) -> String {
    format!(
        "{{\"query_id\":{},\"duplicate_id\":{},\"score\":{},\"day_gap\":{}}}",
        serde_json::Value::String(link.query_id.clone()),
        serde_json::Value::String(link.duplicate_id.clone()),
        format_score(link.relevance_score),
        link.day_gap
    )
}

pub fn write_links_jsonl<'a, W: Write>(
    mut out: W,
    links: impl IntoIterator<Item = &'a DuplicateLink>,
) -> io::Result<()> {
    for link in links {
        writeln!(out, "{}", link_json(link))?;
    }
    out.flush()
}

pub fn read_links_jsonl<R: BufRead>(input: R, path: &Path) -> Result<Vec<DuplicateLink>, ReportError> {
    let mut links = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let link: DuplicateLink = serde_json::from_str(&line).map_err(|e| ReportError::BadLink {
            path: path.to_path_buf(),
            line: i + 1,
            reason: e.to_string(),
        })?;
        if link.day_gap < 1 {
            return Err(ReportError::BadLink {
                path: path.to_path_buf(),
                line: i + 1,
                reason: format!("day_gap {} is below 1", link.day_gap),
            });
        }
        links.push(link);
    }
    Ok(links)
}

pub fn read_links_file(path: &Path) -> Result<Vec<DuplicateLink>, ReportError> {
    let file = File::open(path).map_err(io_err(path))?;
    read_links_jsonl(io::BufReader::new(file), path)
}

fn create(path: &Path) -> Result<BufWriter<File>, ReportError> {
    Ok(BufWriter::new(File::create(path).map_err(io_err(path))?))
}

fn write_jsonl<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> Result<(), ReportError> {
    let mut out = create(path)?;
    for item in items {
        let line = serde_json::to_string(&item).expect("plain data serializes");
        writeln!(out, "{line}").map_err(io_err(path))?;
    }
    out.flush().map_err(io_err(path))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ReportError> {
    let mut text = serde_json::to_string_pretty(value).expect("plain data serializes");
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

fn write_csv(path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(header).map_err(csv_err(path))?;
    for row in rows {
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Settings of a dedup run, stored next to its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DedupManifest {
    pub backend: String,
    pub k: usize,
    pub threshold: f64,
    pub records: usize,
    pub links: usize,
    pub one_to_one: usize,
    pub clusters: usize,
    pub skipped_pairs: usize,
}

/// Writes the link set, its one-to-one reduction, the clusters, the
/// unscored pairs and the manifest into `dir`.
pub fn write_dedup_outputs(
    dir: &Path,
    corpus: &Corpus,
    links: &[DuplicateLink],
    skipped: &[SkippedPair],
    backend: &str,
    k: usize,
    threshold: f64,
) -> Result<DedupManifest, ReportError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let one_to_one = dedup::to_one_to_one(links);
    let clusters = dedup::cluster(links, corpus)?;

    let path = dir.join(LINKS_FILE);
    write_links_jsonl(create(&path)?, links).map_err(io_err(&path))?;
    let path = dir.join(ONE_TO_ONE_FILE);
    write_links_jsonl(create(&path)?, one_to_one.values()).map_err(io_err(&path))?;

    let path = dir.join(LINKS_CSV_FILE);
    write_csv(
        &path,
        &["query_id", "duplicate_id", "score", "day_gap"],
        links
            .iter()
            .map(|l| {
                vec![
                    l.query_id.clone(),
                    l.duplicate_id.clone(),
                    format_score(l.relevance_score),
                    l.day_gap.to_string(),
                ]
            })
            .collect(),
    )?;

    write_jsonl(&dir.join(CLUSTERS_FILE), &clusters)?;
    write_jsonl(&dir.join(SKIPPED_FILE), skipped)?;

    let manifest = DedupManifest {
        backend: backend.to_string(),
        k,
        threshold,
        records: corpus.len(),
        links: links.len(),
        one_to_one: one_to_one.len(),
        clusters: clusters.len(),
        skipped_pairs: skipped.len(),
    };
    write_json(&dir.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UndefinedTallies {
    pub country: u64,
    pub platform: u64,
    pub modality: u64,
    pub language: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub total_debunks: usize,
    pub duplicate_query_count: usize,
    pub duplicate_fraction: f64,
    pub crosslingual_gap_count: usize,
    pub link_count: usize,
    pub one_to_one_count: usize,
    pub cluster_count: usize,
    pub country_denominator: String,
    pub undefined: UndefinedTallies,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub backend: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterTimeline {
    pub cluster_id: usize,
    pub events: Vec<TimelineEvent>,
}

/// Every aggregate the `report` command emits.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub summary: Summary,
    pub countries: Vec<Share<String>>,
    pub orgs: Vec<Share<String>>,
    pub gaps: GapHistogram,
    pub country: CountryTransitions,
    pub platform: Transitions,
    pub modality: Transitions,
    pub language: Transitions,
    pub categories: Vec<Share<Category>>,
    pub category_gaps: Vec<CategoryGap>,
    pub timelines: Vec<ClusterTimeline>,
    pub crosslingual_ids: Vec<String>,
}

impl Report {
    /// Computes all aggregates. Transition tables, the gap histogram and the
    /// category scatter use the one-to-one reduction of `links`; the
    /// cross-lingual gap and the clusters use the full set.
    pub fn compute(
        corpus: &Corpus,
        links: &[DuplicateLink],
        bin_width_days: u32,
        backend: Option<String>,
    ) -> Result<Self, ReportError> {
        let one_to_one = dedup::to_one_to_one(links);
        let reduced: Vec<&DuplicateLink> = one_to_one.values().collect();

        let query_ids: BTreeSet<&str> = links.iter().map(|l| l.query_id.as_str()).collect();
        let (country_counts, org_counts) = analytics::query_side_counts(corpus, query_ids.iter().copied())?;

        let gaps = analytics::gap_histogram(reduced.iter().copied(), bin_width_days)?;
        let country = analytics::country_transitions(corpus, reduced.iter().copied())?;
        let platform = analytics::platform_transitions(corpus, reduced.iter().copied())?;
        let modality = analytics::modality_transitions(corpus, reduced.iter().copied())?;
        let language = analytics::language_pairs(corpus, reduced.iter().copied())?;
        let categories = analytics::category_distribution(query_ids.iter().filter_map(|id| corpus.get(id)));
        let category_gaps = analytics::category_gap_scatter(corpus, reduced.iter().copied())?;
        let (crosslingual_gap_count, crosslingual_ids) = analytics::crosslingual_gap(corpus, links)?;

        let clusters = dedup::cluster(links, corpus)?;
        let timelines = clusters
            .iter()
            .map(|c: &ClaimCluster| {
                Ok(ClusterTimeline {
                    cluster_id: c.cluster_id,
                    events: analytics::timeline(c, corpus)?,
                })
            })
            .collect::<Result<Vec<_>, AnalyticsError>>()?;

        let total = corpus.len();
        let summary = Summary {
            total_debunks: total,
            duplicate_query_count: query_ids.len(),
            duplicate_fraction: if total == 0 {
                0.0
            } else {
                query_ids.len() as f64 / total as f64
            },
            crosslingual_gap_count,
            link_count: links.len(),
            one_to_one_count: one_to_one.len(),
            cluster_count: clusters.len(),
            country_denominator: COUNTRY_DENOMINATOR.to_string(),
            undefined: UndefinedTallies {
                country: country.undefined,
                platform: platform.undefined,
                modality: modality.undefined,
                language: language.undefined,
            },
            backend,
        };

        Ok(Self {
            summary,
            countries: analytics::shares(country_counts),
            orgs: analytics::shares(org_counts),
            gaps,
            country,
            platform,
            modality,
            language,
            categories,
            category_gaps,
            timelines,
            crosslingual_ids,
        })
    }

    /// Writes every table into `dir`, creating it if needed.
    pub fn write(&self, dir: &Path) -> Result<(), ReportError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        write_shares(&dir.join("fig1a_countries.csv"), "country", &self.countries)?;
        write_shares(&dir.join("fig1b_orgs.csv"), "organisation", &self.orgs)?;

        write_csv(
            &dir.join("fig2_gap_histogram.csv"),
            &["bin", "start_day", "end_day", "count"],
            self.gaps
                .bins
                .iter()
                .enumerate()
                .map(|(i, count)| {
                    let (lo, hi) = self.gaps.bin_range(i);
                    vec![i.to_string(), lo.to_string(), hi.to_string(), count.to_string()]
                })
                .collect(),
        )?;

        let country_header = ["rank", "query_country", "duplicate_country", "count"];
        write_table(&dir.join("fig3a_same_country.csv"), &country_header, &self.country.same.counts)?;
        write_table(&dir.join("fig3b_diff_country.csv"), &country_header, &self.country.diff.counts)?;
        write_table(
            &dir.join("fig4a_platforms.csv"),
            &["rank", "query_platform", "duplicate_platform", "count"],
            &self.platform.table.counts,
        )?;
        write_table(
            &dir.join("fig4b_modalities.csv"),
            &["rank", "query_modality", "duplicate_modality", "count"],
            &self.modality.table.counts,
        )?;
        write_table(
            &dir.join("fig5_languages.csv"),
            &["rank", "query_language", "duplicate_language", "count"],
            &self.language.table.counts,
        )?;

        let categories: Vec<Share<String>> = self
            .categories
            .iter()
            .map(|s| Share {
                key: s.key.to_string(),
                count: s.count,
                proportion: s.proportion,
            })
            .collect();
        write_shares(&dir.join("fig6a_categories.csv"), "category", &categories)?;
        write_csv(
            &dir.join("fig6b_category_gaps.csv"),
            &["query_id", "duplicate_id", "category", "day_gap"],
            self.category_gaps
                .iter()
                .map(|g| {
                    vec![
                        g.query_id.clone(),
                        g.duplicate_id.clone(),
                        g.category.to_string(),
                        g.day_gap.to_string(),
                    ]
                })
                .collect(),
        )?;

        write_jsonl(&dir.join("timelines.jsonl"), &self.timelines)?;
        write_json(&dir.join(SUMMARY_FILE), &self.summary)
    }
}

fn write_shares(path: &Path, key: &str, shares: &[Share<String>]) -> Result<(), ReportError> {
    write_csv(
        path,
        &["rank", key, "count", "proportion"],
        shares
            .iter()
            .enumerate()
            .map(|(i, s)| {
                vec![
                    (i + 1).to_string(),
                    s.key.clone(),
                    s.count.to_string(),
                    format_score(s.proportion),
                ]
            })
            .collect(),
    )
}

fn write_table(
    path: &Path,
    header: &[&str],
    counts: &std::collections::BTreeMap<(String, String), u64>,
) -> Result<(), ReportError> {
    let map: HashMap<(String, String), u64> = counts.iter().map(|(k, v)| (k.clone(), *v)).collect();
    let n = map.len();
    write_csv(
        path,
        header,
        analytics::top_n(map, n)
            .into_iter()
            .enumerate()
            .map(|(i, ((to, from), count))| vec![(i + 1).to_string(), to, from, count.to_string()])
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_records;

    fn fixture() -> Corpus {
        let lines = [
            r#"{"id":"a","claim":"x","org":"O1","countries":["India"],"lang":"en","date":"2020-01-01","platforms":["whatsapp"],"modality":"text","category":"Consp"}"#,
            r#"{"id":"b","claim":"x","org":"O2","countries":["India"],"lang":"hi","date":"2020-01-10","platforms":["facebook"],"modality":"image","category":"Consp"}"#,
            r#"{"id":"c","claim":"x","org":"O3","countries":["Spain"],"lang":"es","date":"2020-02-01","platforms":[],"modality":"text","category":"Vacc"}"#,
        ];
        let (records, issues) = parse_records(lines.join("\n").as_bytes()).unwrap();
        assert!(issues.is_empty());
        Corpus::new(records).unwrap()
    }

    fn link(q: &str, d: &str, score: f64, gap: i64) -> DuplicateLink {
        DuplicateLink {
            query_id: q.into(),
            duplicate_id: d.into(),
            relevance_score: score,
            day_gap: gap,
        }
    }

    #[test]
    fn link_json_has_fixed_layout() {
        assert_eq!(
            link_json(&link("q", "d", 0.95, 51)),
            r#"{"query_id":"q","duplicate_id":"d","score":0.950000,"day_gap":51}"#
        );
    }

    #[test]
    fn links_round_trip() {
        let links = vec![link("b", "a", 0.912345, 9), link("c", "a", 1.0, 31)];
        let mut buf = Vec::new();
        write_links_jsonl(&mut buf, &links).unwrap();
        let back = read_links_jsonl(&buf[..], Path::new("mem")).unwrap();
        assert_eq!(back, links);
    }

    #[test]
    fn rejects_bad_link_lines() {
        let err = read_links_jsonl(&b"{\"query_id\":\"q\"}\n"[..], Path::new("mem")).unwrap_err();
        assert!(matches!(err, ReportError::BadLink { line: 1, .. }));
        let zero = br#"{"query_id":"q","duplicate_id":"d","score":0.9,"day_gap":0}"#;
        assert!(read_links_jsonl(&zero[..], Path::new("mem")).is_err());
    }

    #[test]
    fn summary_counts() {
        let corpus = fixture();
        let links = vec![link("b", "a", 0.9, 9), link("c", "a", 0.85, 31), link("c", "b", 0.95, 22)];
        let report = Report::compute(&corpus, &links, 7, None).unwrap();
        let s = &report.summary;
        assert_eq!(s.total_debunks, 3);
        assert_eq!(s.duplicate_query_count, 2);
        assert!((s.duplicate_fraction - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(s.link_count, 3);
        assert_eq!(s.one_to_one_count, 2);
        assert_eq!(s.cluster_count, 1);
        // b (hi) has no hi duplicate, c (es) has no es duplicate
        assert_eq!(s.crosslingual_gap_count, 2);
        // c's representative platform is missing
        assert_eq!(s.undefined.platform, 1);
        assert_eq!(report.country.same.get("India", "India"), 1);
        assert_eq!(report.country.diff.get("Spain", "India"), 1);
        assert_eq!(report.gaps.bins, vec![0, 1, 0, 1]);
    }

    #[test]
    fn empty_links_write_headers_only() {
        let corpus = fixture();
        let dir = tempfile::tempdir().unwrap();
        let report = Report::compute(&corpus, &[], 7, None).unwrap();
        report.write(dir.path()).unwrap();
        assert_eq!(
            fs::read_to_string(dir.path().join("fig3a_same_country.csv")).unwrap(),
            "rank,query_country,duplicate_country,count\n"
        );
        assert_eq!(fs::read_to_string(dir.path().join("timelines.jsonl")).unwrap(), "");
        let summary: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join(SUMMARY_FILE)).unwrap()).unwrap();
        assert_eq!(summary["duplicate_fraction"], 0.0);
    }

    #[test]
    fn rewriting_is_byte_identical() {
        let corpus = fixture();
        let links = vec![link("b", "a", 0.9, 9), link("c", "a", 0.85, 31)];
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        for dir in [a.path(), b.path()] {
            Report::compute(&corpus, &links, 7, Some("char-ngram(3)".into()))
                .unwrap()
                .write(dir)
                .unwrap();
            write_dedup_outputs(dir, &corpus, &links, &[], "char-ngram(3)", 50, 0.8).unwrap();
        }
        let mut names: Vec<_> = fs::read_dir(a.path())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        names.sort();
        assert_eq!(names.len(), 18);
        for name in names {
            assert_eq!(
                fs::read(a.path().join(&name)).unwrap(),
                fs::read(b.path().join(&name)).unwrap(),
                "{name:?}"
            );
        }
    }
}
