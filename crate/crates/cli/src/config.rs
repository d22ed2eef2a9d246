//! Run configuration: a TOML key-value file overridden by command-line flags.
//!
//! ```toml
//! backend = "char-ngram"        # tfidf-cosine | char-ngram | external
//! backend_cmd = "python3 score.py"
//! ngram = 3
//! k = 50
//! threshold = 0.8
//! jobs = 4
//! aliases = "aliases.txt"
//! rules = "category_rules.txt"
//! modality_rules = "modality_rules.txt"
//! langid_floor = 0.25
//! bin_width = 7
//! bind = "127.0.0.1:8080"
//! ```
//!
//! Relative paths in the file are resolved against the file's directory.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use redebunk_core::categorize::CategoryRules;
use redebunk_core::corpus::{ModalityRules, DEFAULT_SIMILARITY_FLOOR};
use redebunk_core::engine::Catalog;
use redebunk_core::index::DEFAULT_CANDIDATE_DEPTH;
use redebunk_core::rerank::{
    validate_threshold, BackendKind, CharNgramBackend, ExternalBackend, TfidfCosineBackend, DEFAULT_THRESHOLD,
};
use redebunk_core::{AliasSet, Similarity};
use serde::Deserialize;

use crate::exit::{Coded, ResultExt};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    backend: Option<String>,
    backend_cmd: Option<String>,
    ngram: Option<usize>,
    k: Option<usize>,
    threshold: Option<f64>,
    jobs: Option<usize>,
    aliases: Option<PathBuf>,
    rules: Option<PathBuf>,
    modality_rules: Option<PathBuf>,
    langid_floor: Option<f64>,
    bin_width: Option<u32>,
    bind: Option<String>,
}

/// Flags shared by every subcommand. Unset flags fall back to the config
/// file, then to built-in defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// TOML config file; flags take precedence over its values
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Similarity backend: tfidf-cosine, char-ngram or external
    #[arg(long, global = true)]
    pub backend: Option<String>,

    /// Command line of the external scorer
    #[arg(long, global = true)]
    pub backend_cmd: Option<String>,

    /// Character n-gram size for the char-ngram backend
    #[arg(long, global = true)]
    pub ngram: Option<usize>,

    /// Lexical candidates per query [default: 50]
    #[arg(long, global = true)]
    pub k: Option<usize>,

    /// Minimum relevance score, inclusive [default: 0.8]
    #[arg(long, global = true)]
    pub threshold: Option<f64>,

    /// Worker threads for duplicate detection [default: 1]
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Alias list, one per line
    #[arg(long, global = true)]
    pub aliases: Option<PathBuf>,

    /// Category rule file
    #[arg(long, global = true)]
    pub rules: Option<PathBuf>,

    /// Modality rule file
    #[arg(long, global = true)]
    pub modality_rules: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub backend: BackendKind,
    pub backend_cmd: Option<String>,
    pub ngram: usize,
    pub k: usize,
    pub threshold: f64,
    pub jobs: usize,
    pub aliases: Option<PathBuf>,
    pub rules: Option<PathBuf>,
    pub modality_rules: Option<PathBuf>,
    pub langid_floor: f64,
    pub bin_width: u32,
    pub bind: String,
}

impl RunConfig {
    pub fn resolve(flags: &Overrides) -> Result<Self> {
        let (file, base) = match &flags.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))
                    .usage()?;
                let file: FileConfig = toml::from_str(&text)
                    .with_context(|| format!("parsing config {}", path.display()))
                    .usage()?;
                (file, path.parent().map(Path::to_path_buf).unwrap_or_default())
            }
            None => (FileConfig::default(), PathBuf::new()),
        };
        let rel = |p: Option<PathBuf>| p.map(|p| if p.is_absolute() { p } else { base.join(p) });

        let backend_name = flags
            .backend
            .clone()
            .or(file.backend)
            .unwrap_or_else(|| BackendKind::TfidfCosine.to_string());
        let backend: BackendKind = backend_name
            .parse()
            .map_err(|e: String| anyhow::anyhow!(e))
            .usage()?;
        let config = RunConfig {
            backend,
            backend_cmd: flags.backend_cmd.clone().or(file.backend_cmd),
            ngram: flags.ngram.or(file.ngram).unwrap_or(3),
            k: flags.k.or(file.k).unwrap_or(DEFAULT_CANDIDATE_DEPTH),
            threshold: flags.threshold.or(file.threshold).unwrap_or(DEFAULT_THRESHOLD),
            jobs: flags.jobs.or(file.jobs).unwrap_or(1),
            aliases: flags.aliases.clone().or(rel(file.aliases)),
            rules: flags.rules.clone().or(rel(file.rules)),
            modality_rules: flags.modality_rules.clone().or(rel(file.modality_rules)),
            langid_floor: file.langid_floor.unwrap_or(DEFAULT_SIMILARITY_FLOOR),
            bin_width: file.bin_width.unwrap_or(7),
            bind: file.bind.unwrap_or_else(|| "127.0.0.1:8080".into()),
        };
        config.validate().usage()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        validate_threshold(self.threshold)?;
        if self.k < 1 {
            bail!("k must be at least 1");
        }
        if self.jobs < 1 {
            bail!("jobs must be at least 1");
        }
        if self.ngram < 1 {
            bail!("ngram must be at least 1");
        }
        if self.bin_width < 1 {
            bail!("bin_width must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.langid_floor) {
            bail!("langid_floor must be within [0, 1]");
        }
        if self.backend == BackendKind::External && self.backend_cmd.is_none() {
            bail!("the external backend needs --backend-cmd");
        }
        Ok(())
    }

    pub fn alias_set(&self) -> Result<AliasSet> {
        match &self.aliases {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading aliases {}", path.display()))
                    .usage()?;
                Ok(AliasSet::parse(&text))
            }
            None => Ok(AliasSet::default()),
        }
    }

    pub fn category_rules(&self) -> Result<CategoryRules> {
        match &self.rules {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading rules {}", path.display()))
                    .usage()?;
                CategoryRules::parse(&text)
                    .with_context(|| format!("in {}", path.display()))
                    .usage()
                    .map_err(Into::into)
            }
            None => Ok(CategoryRules::default()),
        }
    }

    pub fn modality_rules(&self) -> Result<ModalityRules> {
        match &self.modality_rules {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading modality rules {}", path.display()))
                    .usage()?;
                ModalityRules::parse(&text)
                    .with_context(|| format!("in {}", path.display()))
                    .usage()
                    .map_err(Into::into)
            }
            None => Ok(ModalityRules::default()),
        }
    }

    /// Builds the configured similarity backend. TF-IDF weights are fitted on
    /// the catalog's claims.
    pub fn backend(&self, catalog: &Catalog) -> Result<Box<dyn Similarity>, Coded> {
        Ok(match self.backend {
            BackendKind::TfidfCosine => Box::new(TfidfCosineBackend::fit(catalog.claims())),
            BackendKind::CharNgram => Box::new(CharNgramBackend::new(self.ngram)),
            BackendKind::External => {
                let cmd = self.backend_cmd.as_deref().unwrap_or_default();
                Box::new(ExternalBackend::spawn(cmd).backend()?)
            }
        })
    }
}
