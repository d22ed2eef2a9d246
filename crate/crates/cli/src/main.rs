use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

mod commands;
mod config;
mod exit;
mod serve;

use config::{Overrides, RunConfig};

/// Finds debunks of claims that an earlier fact-check already covered.
#[derive(Debug, Parser)]
#[command(name = "redebunk", version)]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a raw dump, fill in missing metadata and build the index
    Ingest {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Find earlier debunks of the same claim by other organisations
    Dedup {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Index written by `ingest`; rebuilt from the corpus if omitted
        #[arg(long)]
        index: Option<PathBuf>,
    },
    /// Write the aggregate tables for a corpus and its links
    Report {
        #[arg(long)]
        input: PathBuf,
        /// Links from `dedup` [default: <out>/links.jsonl]
        #[arg(long)]
        links: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Search the corpus for debunks of a claim
    Query {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        index: Option<PathBuf>,
        /// Print the hits as a JSON array
        #[arg(long)]
        json: bool,
        #[arg(required = true, num_args = 1..)]
        text: Vec<String>,
    },
    /// Serve /search and /health over HTTP
    Serve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        index: Option<PathBuf>,
        /// Listen address [default: 127.0.0.1:8080]
        #[arg(long)]
        bind: Option<String>,
    },
    /// Answer scoring requests on stdin with a built-in backend
    Scorer {
        /// Corpus used to fit tfidf-cosine weights
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<()> {
    let config = RunConfig::resolve(&cli.overrides)?;
    match cli.command {
        Command::Ingest { input, out } => commands::ingest(&input, &out, &config),
        Command::Dedup { input, out, index } => commands::dedup(&input, index.as_deref(), &out, &config).map(drop),
        Command::Report { input, links, out } => commands::report(&input, links.as_deref(), &out, &config),
        Command::Query {
            input,
            index,
            json,
            text,
        } => {
            let engine = commands::engine(&input, index.as_deref(), &config)?;
            commands::query(&engine, &text.join(" "), &config, json)
        }
        Command::Serve { input, index, bind } => {
            let engine = commands::engine(&input, index.as_deref(), &config)?;
            let bind = bind.unwrap_or_else(|| config.bind.clone());
            serve::run(engine, &bind, config.k, config.threshold)
        }
        Command::Scorer { input } => commands::scorer(input.as_deref(), &config),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(exit::USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit::code_of(&e))
        }
    }
}
