#![allow(dead_code)]

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use redebunk_core::{Category, DebunkRecord, LangCode, Modality};

pub fn fixture_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn date(s: &str) -> NaiveDate {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
}

pub fn day(offset: i64) -> NaiveDate {
    date("2020-01-01") + chrono::Duration::days(offset)
}

pub fn record(id: &str, claim: &str, org: &str, when: NaiveDate) -> DebunkRecord {
    DebunkRecord {
        id: id.into(),
        claim_text: claim.into(),
        organisation: org.into(),
        countries: vec!["India".into()],
        url: format!("https://factcheck.example/{id}"),
        language: Some(LangCode::try_from("en".to_string()).unwrap()),
        debunk_date: when,
        platforms: vec!["facebook".into()],
        modality: Some(Modality::Text),
        category: Some(Category::Other),
    }
}

pub fn lang(code: &str) -> LangCode {
    LangCode::try_from(code.to_string()).unwrap()
}

const WORDS: &[&str] = &[
    "vitamin", "cure", "garlic", "water", "vaccine", "mask", "5g", "tower", "lemon", "hot", "drink", "kills",
    "coronavirus", "spread", "children", "hospital", "doctor", "salt", "sun", "heat",
];
const ORGS: &[&str] = &["AFP", "PolitiFact", "Boom", "Maldita", "Aos Fatos", "VoxCheck"];
const COUNTRIES: &[&str] = &["India", "Spain", "Brazil", "United States", "France"];
const LANGS: &[&str] = &["en", "es", "pt", "fr", "hi", "und"];
const PLATFORMS: &[&str] = &["facebook", "whatsapp", "twitter", "youtube"];

/// Records drawn from a small vocabulary so that many claims overlap, with
/// dates spread over `days` days. Some records lack platforms or carry
/// undefined modality and language.
pub fn random_corpus(rng: &mut ChaCha8Rng, n: usize, days: i64) -> Vec<DebunkRecord> {
    (0..n)
        .map(|i| {
            let len = rng.gen_range(3..=8);
            let claim: Vec<&str> = (0..len).map(|_| *WORDS.choose(rng).unwrap()).collect();
            let mut r = record(
                &format!("r{i:05}"),
                &claim.join(" "),
                ORGS.choose(rng).unwrap(),
                day(rng.gen_range(0..days)),
            );
            r.countries = vec![COUNTRIES.choose(rng).unwrap().to_string()];
            r.language = Some(lang(LANGS.choose(rng).unwrap()));
            r.platforms = if rng.gen_bool(0.1) {
                vec![]
            } else {
                vec![PLATFORMS.choose(rng).unwrap().to_string()]
            };
            r.modality = Some(*Modality::ALL.choose(rng).unwrap());
            r.category = Some(*Category::ALL.choose(rng).unwrap());
            r
        })
        .collect()
}
