//! Line-delimited record format.
//!
//! Each non-blank line is one JSON object with the keys `id` (optional),
//! `claim`, `org`, `countries` (array), `url`, `lang` (optional), `date`
//! (`YYYY-MM-DD`), `platforms` (array, optional), `modality` (optional) and
//! `category` (optional). Unknown keys are ignored.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use super::{assign_id, CorpusError, DebunkRecord, LangCode, Modality};
use crate::categorize::Category;

/// A line that could not be turned into a record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParseIssue {
    pub line: usize,
    pub reason: IssueReason,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IssueReason {
    InvalidUtf8,
    InvalidJson(String),
    MissingField(&'static str),
    EmptyField(&'static str),
    InvalidDate(String),
    InvalidLanguage(String),
    InvalidModality(String),
    InvalidCategory(String),
    DuplicateId(String),
}

impl fmt::Display for IssueReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IssueReason::InvalidUtf8 => write!(f, "invalid UTF-8"),
            IssueReason::InvalidJson(e) => write!(f, "invalid record object: {e}"),
            IssueReason::MissingField(name) => write!(f, "missing {name}"),
            IssueReason::EmptyField(name) => write!(f, "empty {name}"),
            IssueReason::InvalidDate(d) => write!(f, "invalid debunk_date `{d}`"),
            IssueReason::InvalidLanguage(l) => write!(f, "invalid language `{l}`"),
            IssueReason::InvalidModality(m) => write!(f, "invalid modality `{m}`"),
            IssueReason::InvalidCategory(c) => write!(f, "invalid category `{c}`"),
            IssueReason::DuplicateId(id) => write!(f, "duplicate id `{id}`"),
        }
    }
}

impl Serialize for IssueReason {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[derive(Debug, Deserialize)]
struct RawRecord {
    id: Option<String>,
    claim: Option<String>,
    org: Option<String>,
    countries: Option<Vec<String>>,
    url: Option<String>,
    lang: Option<String>,
    date: Option<String>,
    platforms: Option<Vec<String>>,
    modality: Option<String>,
    category: Option<String>,
}

#[derive(Serialize)]
struct RecordOut<'a> {
    id: &'a str,
    claim: &'a str,
    org: &'a str,
    countries: &'a [String],
    url: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    lang: Option<&'a str>,
    date: String,
    platforms: &'a [String],
    #[serde(skip_serializing_if = "Option::is_none")]
    modality: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    category: Option<&'static str>,
}

fn clean_list(values: Vec<String>, lowercase: bool) -> Vec<String> {
    values
        .into_iter()
        .map(|v| {
            let v: String = v.trim().nfc().collect();
            if lowercase {
                v.to_lowercase()
            } else {
                v
            }
        })
        .filter(|v| !v.is_empty())
        .collect()
}

fn required(value: Option<String>, name: &'static str) -> Result<String, IssueReason> {
    let value = value.ok_or(IssueReason::MissingField(name))?;
    let value = value.trim();
    if value.is_empty() {
        return Err(IssueReason::EmptyField(name));
    }
    Ok(value.to_string())
}

fn record_from_line(line: &str) -> Result<DebunkRecord, IssueReason> {
    let raw: RawRecord =
        serde_json::from_str(line).map_err(|e| IssueReason::InvalidJson(e.to_string()))?;
    let claim_text = required(raw.claim, "claim")?;
    let organisation = required(raw.org, "org")?;
    let countries = clean_list(
        raw.countries.ok_or(IssueReason::MissingField("countries"))?,
        false,
    );
    if countries.is_empty() {
        return Err(IssueReason::EmptyField("countries"));
    }
    let date = raw.date.ok_or(IssueReason::MissingField("debunk_date"))?;
    let debunk_date = NaiveDate::parse_from_str(date.trim(), "%Y-%m-%d")
        .ok()
        .filter(|_| date.trim().len() == 10)
        .ok_or_else(|| IssueReason::InvalidDate(date.clone()))?;
    let language = raw
        .lang
        .map(|l| {
            l.trim()
                .parse::<LangCode>()
                .map_err(|_| IssueReason::InvalidLanguage(l))
        })
        .transpose()?;
    let modality = raw
        .modality
        .map(|m| m.parse::<Modality>().map_err(IssueReason::InvalidModality))
        .transpose()?;
    let category = raw
        .category
        .map(|c| c.parse::<Category>().map_err(|_| IssueReason::InvalidCategory(c)))
        .transpose()?;
    let url = raw.url.map(|u| u.trim().to_string()).unwrap_or_default();
    let id = match raw.id.map(|i| i.trim().to_string()).filter(|i| !i.is_empty()) {
        Some(id) => id,
        None => assign_id(&organisation, &url, &claim_text),
    };
    Ok(DebunkRecord {
        id,
        claim_text,
        organisation,
        countries,
        url,
        language,
        debunk_date,
        platforms: clean_list(raw.platforms.unwrap_or_default(), true),
        modality,
        category,
    })
}

/// Parses every line of `input`.
///
/// Bad lines become [`ParseIssue`]s and parsing continues; only a failure of
/// the underlying reader aborts. A line whose id repeats an earlier record's
/// id is reported as an issue so the returned records always have unique ids.
pub fn parse_records<R: Read>(input: R) -> Result<(Vec<DebunkRecord>, Vec<ParseIssue>), CorpusError> {
    let reader = BufReader::new(input);
    let mut records = Vec::new();
    let mut issues = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in reader.split(b'\n').enumerate() {
        let line_no = idx + 1;
        let bytes = line?;
        let text = match std::str::from_utf8(&bytes) {
            Ok(t) => t,
            Err(_) => {
                issues.push(ParseIssue {
                    line: line_no,
                    reason: IssueReason::InvalidUtf8,
                });
                continue;
            }
        };
        let text = text.strip_suffix('\r').unwrap_or(text);
        if text.trim().is_empty() {
            continue;
        }
        match record_from_line(text) {
            Ok(record) => {
                if seen.insert(record.id.clone()) {
                    records.push(record);
                } else {
                    issues.push(ParseIssue {
                        line: line_no,
                        reason: IssueReason::DuplicateId(record.id),
                    });
                }
            }
            Err(reason) => issues.push(ParseIssue {
                line: line_no,
                reason,
            }),
        }
    }
    Ok((records, issues))
}

pub fn parse_records_from_path(
    path: &Path,
) -> Result<(Vec<DebunkRecord>, Vec<ParseIssue>), CorpusError> {
    parse_records(File::open(path)?)
}

/// Renders one record as a single line (without the trailing newline).
pub fn serialize_record(record: &DebunkRecord) -> String {
    let out = RecordOut {
        id: &record.id,
        claim: &record.claim_text,
        org: &record.organisation,
        countries: &record.countries,
        url: &record.url,
        lang: record.language.as_ref().map(LangCode::as_str),
        date: record.debunk_date.format("%Y-%m-%d").to_string(),
        platforms: &record.platforms,
        modality: record.modality.map(Modality::as_str),
        category: record.category.map(Category::as_str),
    };
    serde_json::to_string(&out).expect("record serialization is infallible")
}

pub fn write_records<W: Write>(mut out: W, records: &[DebunkRecord]) -> std::io::Result<()> {
    for r in records {
        writeln!(out, "{}", serialize_record(r))?;
    }
    out.flush()
}
