//! Fact-check records: the data model, the line-delimited input format,
//! stable identifiers and metadata enrichment.

mod id;
mod langid;
mod modality;
mod parse;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::categorize::{Category, CategoryRules};
use crate::normalize::AliasSet;

pub use id::assign_id;
pub use langid::{detect_language, LanguageIdentifier, DEFAULT_SIMILARITY_FLOOR, MIN_TEXT_CHARS};
pub use modality::{classify_modality, ModalityRules, DEFAULT_MODALITY_RULES};
pub use parse::{parse_records, parse_records_from_path, serialize_record, write_records, IssueReason, ParseIssue};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("failed to read records")]
    Io(#[from] std::io::Error),
    #[error("duplicate record id `{0}`")]
    DuplicateId(String),
}

/// ISO 639-1 code, or `und` when the language is undetermined.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct LangCode(String);

impl LangCode {
    pub const UNDETERMINED: &'static str = "und";

    pub fn undetermined() -> Self {
        Self(Self::UNDETERMINED.to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_undetermined(&self) -> bool {
        self.0 == Self::UNDETERMINED
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid language code `{0}`")]
pub struct InvalidLangCode(pub String);

impl FromStr for LangCode {
    type Err = InvalidLangCode;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let ok = s == Self::UNDETERMINED
            || (s.len() == 2 && s.bytes().all(|b| b.is_ascii_lowercase()));
        if ok {
            Ok(Self(s.to_string()))
        } else {
            Err(InvalidLangCode(s.to_string()))
        }
    }
}

impl TryFrom<String> for LangCode {
    type Error = InvalidLangCode;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<LangCode> for String {
    fn from(value: LangCode) -> Self {
        value.0
    }
}

impl fmt::Display for LangCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Content form of the spreading claim.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Modality {
    Text,
    Image,
    Video,
    Audio,
    Mixed,
    Unknown,
}

impl Modality {
    pub const ALL: [Modality; 6] = [
        Modality::Text,
        Modality::Image,
        Modality::Video,
        Modality::Audio,
        Modality::Mixed,
        Modality::Unknown,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Modality::Text => "text",
            Modality::Image => "image",
            Modality::Video => "video",
            Modality::Audio => "audio",
            Modality::Mixed => "mixed",
            Modality::Unknown => "unknown",
        }
    }
}

impl FromStr for Modality {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Modality::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| s.to_string())
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One fact-checked claim with its provenance metadata.
///
/// `language`, `modality` and `category` may be absent on input; the
/// [`Enricher`] fills in whichever are missing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DebunkRecord {
    pub id: String,
    pub claim_text: String,
    pub organisation: String,
    pub countries: Vec<String>,
    pub url: String,
    pub language: Option<LangCode>,
    pub debunk_date: NaiveDate,
    pub platforms: Vec<String>,
    pub modality: Option<Modality>,
    pub category: Option<Category>,
}

impl DebunkRecord {
    pub fn representative_country(&self) -> Option<&str> {
        self.countries.first().map(String::as_str)
    }

    pub fn representative_platform(&self) -> Option<&str> {
        self.platforms.first().map(String::as_str)
    }
}

/// Records with unique ids, in input order.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    records: Vec<DebunkRecord>,
    by_id: HashMap<String, usize>,
}

impl Corpus {
    pub fn new(records: Vec<DebunkRecord>) -> Result<Self, CorpusError> {
        let mut by_id = HashMap::with_capacity(records.len());
        for (i, r) in records.iter().enumerate() {
            if by_id.insert(r.id.clone(), i).is_some() {
                return Err(CorpusError::DuplicateId(r.id.clone()));
            }
        }
        Ok(Self { records, by_id })
    }

    pub fn records(&self) -> &[DebunkRecord] {
        &self.records
    }

    pub fn get(&self, id: &str) -> Option<&DebunkRecord> {
        self.by_id.get(id).map(|&i| &self.records[i])
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.by_id.get(id).copied()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn into_records(self) -> Vec<DebunkRecord> {
        self.records
    }
}

/// Fills in missing language, modality and category metadata. Values already
/// present on a record are never replaced.
#[derive(Debug, Clone, Default)]
pub struct Enricher {
    pub languages: LanguageIdentifier,
    pub modality_rules: ModalityRules,
    pub category_rules: CategoryRules,
    pub aliases: AliasSet,
}

impl Enricher {
    pub fn enrich(&self, record: &mut DebunkRecord) {
        if record.language.is_none() {
            record.language = Some(self.languages.detect(&record.claim_text));
        }
        if record.modality.is_none() {
            record.modality = Some(self.modality_rules.classify(&record.claim_text));
        }
        if record.category.is_none() {
            let canonical = self.aliases.canonicalize(&record.claim_text);
            record.category = Some(self.category_rules.classify(&canonical));
        }
    }

    pub fn enrich_all(&self, records: &mut [DebunkRecord]) {
        for r in records {
            self.enrich(r);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lang_code_validation() {
        assert!("en".parse::<LangCode>().is_ok());
        assert!("und".parse::<LangCode>().is_ok());
        assert!("EN".parse::<LangCode>().is_err());
        assert!("eng".parse::<LangCode>().is_err());
        assert!("e1".parse::<LangCode>().is_err());
        assert!("".parse::<LangCode>().is_err());
    }

    #[test]
    fn modality_parses_case_insensitively() {
        assert_eq!("Video".parse::<Modality>(), Ok(Modality::Video));
        assert!("hologram".parse::<Modality>().is_err());
    }

    #[test]
    fn enrichment_keeps_precomputed_fields() {
        let mut r = parse_records(
            br#"{"claim":"A video shows vitamin C cures COVID-19","org":"X","countries":["Spain"],"url":"","date":"2020-03-01","lang":"es","modality":"image","category":"Consp"}"#
                .as_slice(),
        )
        .unwrap()
        .0
        .remove(0);
        let before = r.clone();
        Enricher::default().enrich(&mut r);
        assert_eq!(r, before);
    }

    #[test]
    fn enrichment_fills_missing_fields() {
        let mut r = parse_records(
            br#"{"claim":"A video shows that vitamin C will protect you from the coronavirus.","org":"X","countries":["Spain"],"url":"","date":"2020-03-01"}"#
                .as_slice(),
        )
        .unwrap()
        .0
        .remove(0);
        Enricher::default().enrich(&mut r);
        assert_eq!(r.language.as_ref().map(LangCode::as_str), Some("en"));
        assert_eq!(r.modality, Some(Modality::Video));
        assert_eq!(r.category, Some(Category::GenMedAdv));
    }

    #[test]
    fn corpus_rejects_duplicate_ids() {
        let line = br#"{"id":"a","claim":"c","org":"o","countries":["x"],"url":"","date":"2020-01-01"}"#;
        let r = parse_records(line.as_slice()).unwrap().0.remove(0);
        let err = Corpus::new(vec![r.clone(), r]).unwrap_err();
        assert!(matches!(err, CorpusError::DuplicateId(id) if id == "a"));
    }
}
