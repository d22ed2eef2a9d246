use std::fs::{self, File};
use std::io::{self, BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use redebunk_core::corpus::{parse_records_from_path, write_records, Enricher, LanguageIdentifier};
use redebunk_core::dedup::{find_duplicates, DedupConfig, DedupError};
use redebunk_core::engine::{Catalog, EngineError, QueryEngine};
use redebunk_core::report::{self, DedupManifest, Report};
use redebunk_core::rerank::{BackendKind, CharNgramBackend, TfidfCosineBackend};
use redebunk_core::{Bm25Index, Bm25Params, Corpus, DebunkRecord, Similarity};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::exit::ResultExt;

pub const CORPUS_FILE: &str = "corpus.jsonl";
pub const ISSUES_FILE: &str = "issues.jsonl";
pub const INDEX_FILE: &str = "index.bm25";

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)
        .with_context(|| format!("creating {}", dir.display()))
        .data()?;
    Ok(())
}

/// Parses a record file, reporting skipped lines on stderr.
fn read_records(path: &Path) -> Result<(Vec<DebunkRecord>, Vec<redebunk_core::ParseIssue>)> {
    let (records, issues) = parse_records_from_path(path)
        .with_context(|| format!("reading {}", path.display()))
        .data()?;
    if !issues.is_empty() {
        eprintln!("{}: skipped {} invalid line(s)", path.display(), issues.len());
        for issue in issues.iter().take(5) {
            eprintln!("  line {}: {}", issue.line, issue.reason);
        }
    }
    Ok((records, issues))
}

fn enricher(config: &RunConfig) -> Result<Enricher> {
    Ok(Enricher {
        languages: LanguageIdentifier::default().with_floor(config.langid_floor),
        modality_rules: config.modality_rules()?,
        category_rules: config.category_rules()?,
        aliases: config.alias_set()?,
    })
}

/// Loads a corpus and fills in any missing metadata.
pub fn load_corpus(path: &Path, config: &RunConfig) -> Result<Corpus> {
    let (mut records, _) = read_records(path)?;
    enricher(config)?.enrich_all(&mut records);
    Ok(Corpus::new(records).data()?)
}

pub fn load_catalog(input: &Path, index: Option<&Path>, config: &RunConfig) -> Result<Catalog> {
    let corpus = load_corpus(input, config)?;
    let aliases = config.alias_set()?;
    let catalog = match index {
        Some(path) => {
            let file = File::open(path)
                .with_context(|| format!("opening index {}", path.display()))
                .data()?;
            let index = Bm25Index::read_from(io::BufReader::new(file))
                .with_context(|| format!("loading index {}", path.display()))
                .data()?;
            Catalog::with_index(corpus, aliases, index).data()?
        }
        None => Catalog::build(corpus, aliases, Bm25Params::default()).data()?,
    };
    Ok(catalog)
}

pub fn ingest(input: &Path, out: &Path, config: &RunConfig) -> Result<()> {
    let (mut records, issues) = read_records(input)?;
    enricher(config)?.enrich_all(&mut records);
    let corpus = Corpus::new(records).data()?;
    create_dir(out)?;

    let path = out.join(CORPUS_FILE);
    let file = File::create(&path)
        .with_context(|| format!("creating {}", path.display()))
        .data()?;
    write_records(BufWriter::new(file), corpus.records())
        .with_context(|| format!("writing {}", path.display()))
        .data()?;

    let path = out.join(ISSUES_FILE);
    let mut text = String::new();
    for issue in &issues {
        text.push_str(&serde_json::to_string(issue)?);
        text.push('\n');
    }
    fs::write(&path, text)
        .with_context(|| format!("writing {}", path.display()))
        .data()?;

    let n = corpus.len();
    let catalog = Catalog::build(corpus, config.alias_set()?, Bm25Params::default()).data()?;
    let path = out.join(INDEX_FILE);
    let file = File::create(&path)
        .with_context(|| format!("creating {}", path.display()))
        .data()?;
    catalog
        .index()
        .write_to(BufWriter::new(file))
        .with_context(|| format!("writing {}", path.display()))
        .data()?;
    eprintln!("ingested {n} record(s), {} issue(s)", issues.len());
    Ok(())
}

pub fn dedup(input: &Path, index: Option<&Path>, out: &Path, config: &RunConfig) -> Result<DedupManifest> {
    let catalog = load_catalog(input, index, config)?;
    let backend = config.backend(&catalog)?;
    let dedup_config = DedupConfig {
        k: config.k,
        threshold: config.threshold,
        jobs: config.jobs,
    };
    let output = match find_duplicates(&catalog, backend.as_ref(), &dedup_config) {
        Ok(o) => o,
        Err(e @ DedupError::Backend(_)) => return Err(e).backend()?,
        Err(e @ (DedupError::InvalidThreshold(_) | DedupError::InvalidJobs)) => return Err(e).usage()?,
        Err(e) => return Err(e).data()?,
    };
    if !output.skipped.is_empty() {
        eprintln!(
            "{} pair(s) could not be scored by {}; see {}",
            output.skipped.len(),
            backend.name(),
            report::SKIPPED_FILE
        );
    }
    let manifest = report::write_dedup_outputs(
        out,
        catalog.corpus(),
        &output.links,
        &output.skipped,
        &backend.name(),
        config.k,
        config.threshold,
    )
    .data()?;
    eprintln!(
        "{} link(s), {} query claim(s), {} cluster(s)",
        manifest.links, manifest.one_to_one, manifest.clusters
    );
    Ok(manifest)
}

pub fn report(input: &Path, links: Option<&Path>, out: &Path, config: &RunConfig) -> Result<()> {
    let corpus = load_corpus(input, config)?;
    let links_path: PathBuf = links.map(Path::to_path_buf).unwrap_or_else(|| out.join(report::LINKS_FILE));
    let links = report::read_links_file(&links_path).data()?;
    let manifest_path = links_path
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .join(report::MANIFEST_FILE);
    let backend = match fs::read_to_string(&manifest_path) {
        Ok(text) => Some(
            serde_json::from_str::<DedupManifest>(&text)
                .with_context(|| format!("parsing {}", manifest_path.display()))
                .data()?
                .backend,
        ),
        Err(_) => None,
    };
    let report = Report::compute(&corpus, &links, config.bin_width, backend).data()?;
    report.write(out).data()?;
    let s = &report.summary;
    eprintln!(
        "{} of {} debunk(s) have earlier duplicates ({:.1}%)",
        s.duplicate_query_count,
        s.total_debunks,
        100.0 * s.duplicate_fraction
    );
    Ok(())
}

pub fn engine(input: &Path, index: Option<&Path>, config: &RunConfig) -> Result<QueryEngine> {
    let catalog = load_catalog(input, index, config)?;
    let backend = config.backend(&catalog)?;
    Ok(QueryEngine::new(catalog, backend))
}

pub fn query(engine: &QueryEngine, text: &str, config: &RunConfig, json: bool) -> Result<()> {
    let hits = match engine.query(text, config.k, config.threshold) {
        Ok(h) => h,
        Err(e @ EngineError::Backend(_)) => return Err(e).backend()?,
        Err(e) => return Err(e).usage()?,
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    if json {
        writeln!(out, "{}", serde_json::to_string(&hits)?)?;
    } else {
        for h in &hits {
            writeln!(
                out,
                "{:.6}\t{}\t{}\t{}\t{}\t{}",
                h.score, h.id, h.org, h.date, h.lang, h.url
            )?;
        }
    }
    Ok(())
}

#[derive(Deserialize)]
struct ScoreRequest {
    id: u64,
    a: String,
    b: String,
}

#[derive(Serialize)]
struct ScoreResponse {
    id: u64,
    score: f64,
}

/// Serves a built-in backend over the external scorer protocol on stdin and
/// stdout, one JSON request per line.
pub fn scorer(input: Option<&Path>, config: &RunConfig) -> Result<()> {
    let backend: Box<dyn Similarity> = match config.backend {
        BackendKind::CharNgram => Box::new(CharNgramBackend::new(config.ngram)),
        BackendKind::TfidfCosine => {
            let input = input
                .context("the tfidf-cosine scorer needs --input to fit its weights")
                .usage()?;
            let catalog = load_catalog(input, None, config)?;
            Box::new(TfidfCosineBackend::fit(catalog.claims()))
        }
        BackendKind::External => {
            return Err(anyhow::anyhow!("the scorer serves tfidf-cosine or char-ngram")).usage()?;
        }
    };
    let stdin = io::stdin();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    for line in stdin.lock().lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let request: ScoreRequest = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("scorer: ignoring malformed request: {e}");
                continue;
            }
        };
        let score = backend.score_pair(&request.a, &request.b)?;
        let response = ScoreResponse { id: request.id, score };
        writeln!(out, "{}", serde_json::to_string(&response)?)?;
        out.flush()?;
    }
    Ok(())
}
