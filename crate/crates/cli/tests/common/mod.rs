#![allow(dead_code)]

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::net::TcpStream;
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output, Stdio};
use std::time::Duration;

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use redebunk_core::corpus::write_records;
use redebunk_core::{Category, DebunkRecord, LangCode, Modality};

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_redebunk")
}

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
}

pub fn redebunk(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("running redebunk")
}

/// Runs the binary, panicking with its stderr unless it exits 0.
pub fn ok(args: &[&str]) -> Output {
    let out = redebunk(args);
    assert!(
        out.status.success(),
        "redebunk {args:?} exited {:?}\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

pub fn day(offset: i64) -> NaiveDate {
    NaiveDate::from_ymd_opt(2020, 1, 1).unwrap() + chrono::Duration::days(offset)
}

pub fn lang(code: &str) -> LangCode {
    LangCode::try_from(code.to_string()).unwrap()
}

pub fn record(id: &str, claim: &str, org: &str, when: NaiveDate) -> DebunkRecord {
    DebunkRecord {
        id: id.into(),
        claim_text: claim.into(),
        organisation: org.into(),
        countries: vec!["India".into()],
        url: format!("https://factcheck.example/{id}"),
        language: Some(lang("en")),
        debunk_date: when,
        platforms: vec!["facebook".into()],
        modality: Some(Modality::Text),
        category: Some(Category::Other),
    }
}

pub fn write_corpus(path: &Path, records: &[DebunkRecord]) {
    write_records(BufWriter::new(File::create(path).unwrap()), records).unwrap();
}

const SYLLABLES: &[&str] = &[
    "ka", "lo", "mi", "ne", "ru", "sa", "ti", "vo", "pe", "da", "go", "hu", "zi", "be", "fa", "jo", "ke", "ly", "no",
    "qu",
];
const COUNTRIES: &[&str] = &[
    "India", "Spain", "Brazil", "United States", "France", "Philippines", "Indonesia", "Turkey", "Germany", "Kenya",
];
const LANGS: &[&str] = &["en", "es", "pt", "fr", "hi", "id", "tr", "de", "und"];
const PLATFORMS: &[&str] = &["facebook", "whatsapp", "twitter", "youtube", "instagram", "tiktok"];
const VIRUS: &[&str] = &["covid-19", "coronavirus", "sars-cov-2", "corona virus", "covid19"];

fn word(i: usize) -> String {
    let n = SYLLABLES.len();
    let mut w = String::new();
    w.push_str(SYLLABLES[i % n]);
    w.push_str(SYLLABLES[(i / n) % n]);
    if i >= n * n {
        w.push_str(SYLLABLES[(i / (n * n)) % n]);
    }
    w
}

/// A word index skewed towards small values, so that a few words are very
/// common and most are rare.
fn zipf_word(rng: &mut ChaCha8Rng, vocab: usize) -> String {
    let u: f64 = rng.gen();
    word((u.powi(3) * vocab as f64) as usize)
}

fn fresh_claim(rng: &mut ChaCha8Rng) -> Vec<String> {
    let len = rng.gen_range(8..=18);
    let mut claim: Vec<String> = (0..len).map(|_| zipf_word(rng, 6000)).collect();
    if rng.gen_bool(0.4) {
        let at = rng.gen_range(0..claim.len());
        claim[at] = VIRUS.choose(rng).unwrap().to_string();
    }
    claim
}

/// Deterministic synthetic corpus of `n` records. About half the records
/// retell one of a few hundred recurring narratives with one or two words
/// changed, so similarity backends find real duplicate links; the rest are
/// one-off claims. Metadata is drawn at random, with some records lacking
/// platforms or carrying undetermined language.
pub fn synthetic_corpus(seed: u64, n: usize) -> Vec<DebunkRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let narratives: Vec<Vec<String>> = (0..(n / 8).max(1)).map(|_| fresh_claim(&mut rng)).collect();
    let orgs: Vec<String> = (0..60).map(|i| format!("Fact Desk {i:02}")).collect();
    (0..n)
        .map(|i| {
            let claim = if rng.gen_bool(0.5) {
                let mut c = narratives.choose(&mut rng).unwrap().clone();
                for _ in 0..rng.gen_range(0..=2) {
                    let at = rng.gen_range(0..c.len());
                    c[at] = zipf_word(&mut rng, 6000);
                }
                c
            } else {
                fresh_claim(&mut rng)
            };
            let mut r = record(
                &format!("s{i:05}"),
                &claim.join(" "),
                orgs.choose(&mut rng).unwrap(),
                day(rng.gen_range(0..365)),
            );
            r.countries = vec![COUNTRIES.choose(&mut rng).unwrap().to_string()];
            if rng.gen_bool(0.2) {
                r.countries.push(COUNTRIES.choose(&mut rng).unwrap().to_string());
            }
            r.language = Some(lang(LANGS.choose(&mut rng).unwrap()));
            r.platforms = if rng.gen_bool(0.1) {
                vec![]
            } else {
                vec![PLATFORMS.choose(&mut rng).unwrap().to_string()]
            };
            r.modality = Some(*Modality::ALL.choose(&mut rng).unwrap());
            r.category = Some(*Category::ALL.choose(&mut rng).unwrap());
            r
        })
        .collect()
}

/// A running `redebunk serve`, killed on drop.
pub struct Server {
    child: Child,
    pub addr: String,
}

impl Server {
    pub fn start(args: &[&str]) -> Server {
        let mut child = Command::new(bin())
            .arg("serve")
            .args(args)
            .args(["--bind", "127.0.0.1:0"])
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .expect("spawning server");
        let mut line = String::new();
        BufReader::new(child.stdout.take().unwrap())
            .read_line(&mut line)
            .unwrap();
        let addr = line
            .trim()
            .strip_prefix("listening on http://")
            .unwrap_or_else(|| panic!("unexpected banner {line:?}"))
            .to_string();
        Server { child, addr }
    }

    /// Sends a GET request and returns the status code and body.
    pub fn get(&self, path_and_query: &str) -> (u16, String) {
        let mut stream = TcpStream::connect(&self.addr).unwrap();
        stream.set_read_timeout(Some(Duration::from_secs(30))).unwrap();
        write!(
            stream,
            "GET {path_and_query} HTTP/1.1\r\nHost: {}\r\nConnection: close\r\n\r\n",
            self.addr
        )
        .unwrap();
        let mut response = String::new();
        stream.read_to_string(&mut response).unwrap();
        let (head, body) = response.split_once("\r\n\r\n").expect("malformed response");
        let status = head
            .split_whitespace()
            .nth(1)
            .and_then(|c| c.parse().ok())
            .expect("malformed status line");
        (status, body.to_string())
    }

    pub fn search(&self, q: &str, extra: &str) -> (u16, String) {
        self.get(&format!("/search?q={}{extra}", urlencoding::encode(q)))
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
