//! Labeled sentence corpora: file formats, noise filtering, stratified
//! splitting and per-language statistics.

mod filter;
mod stats;

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use filter::{
    confidence_filter, default_expected_scripts, noise_filter, write_rejections, NoiseFilter, RejectReason, Rejection,
};
pub use stats::{compute_stats, CorpusStats, LabelStats, StatsFormat};

/// The 25 script-distinguished labels of the default schema.
pub const DEFAULT_LABELS: [&str; 25] = [
    "asm", "ben", "brx", "doi", "eng", "gom", "guj", "hin", "kan", "kas", "mai", "mal", "mar", "mni_Beng", "mni_Mtei",
    "npi", "ory", "pan", "san", "sat", "snd_Arab", "snd_Deva", "tam", "tel", "urd",
];

/// Three lowercase letters, optionally `_` and a four-letter script tag.
pub fn is_valid_label(label: &str) -> bool {
    let (lang, script) = match label.split_once('_') {
        Some((l, s)) => (l, Some(s)),
        None => (label, None),
    };
    lang.len() == 3
        && lang.bytes().all(|b| b.is_ascii_lowercase())
        && script.is_none_or(|s| s.len() == 4 && s.bytes().all(|b| b.is_ascii_alphabetic()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceRecord {
    pub label: String,
    pub text: String,
}

impl SentenceRecord {
    pub fn new(label: impl Into<String>, text: impl Into<String>) -> Result<Self> {
        let record = SentenceRecord { label: label.into(), text: text.into() };
        record.validate()?;
        Ok(record)
    }

    fn validate(&self) -> Result<()> {
        if !is_valid_label(&self.label) {
            return Err(Error::Validation(format!("invalid label `{}`", self.label)));
        }
        if self.text.trim().is_empty() {
            return Err(Error::Validation(format!("empty text for label `{}`", self.label)));
        }
        Ok(())
    }
}

/// Ordered records plus the sorted set of labels they use.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Corpus {
    records: Vec<SentenceRecord>,
    label_set: Vec<String>,
}

impl Corpus {
    pub fn new(records: Vec<SentenceRecord>) -> Self {
        let label_set = records.iter().map(|r| r.label.clone()).collect::<BTreeSet<_>>().into_iter().collect();
        Corpus { records, label_set }
    }

    pub fn records(&self) -> &[SentenceRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<SentenceRecord> {
        self.records
    }

    pub fn label_set(&self) -> &[String] {
        &self.label_set
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn texts(&self) -> impl Iterator<Item = &str> + Clone {
        self.records.iter().map(|r| r.text.as_str())
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> + Clone {
        self.records.iter().map(|r| r.label.as_str())
    }
}

impl FromIterator<SentenceRecord> for Corpus {
    fn from_iter<I: IntoIterator<Item = SentenceRecord>>(iter: I) -> Self {
        Corpus::new(iter.into_iter().collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CorpusFormat {
    #[default]
    Tsv,
    Jsonl,
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tsv" => Ok(CorpusFormat::Tsv),
            "jsonl" => Ok(CorpusFormat::Jsonl),
            other => Err(Error::Config(format!("unknown corpus format `{other}`"))),
        }
    }
}

impl fmt::Display for CorpusFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorpusFormat::Tsv => "tsv",
            CorpusFormat::Jsonl => "jsonl",
        })
    }
}

pub fn load_corpus(path: impl AsRef<Path>, format: CorpusFormat) -> Result<Corpus> {
    let bytes = fs::read(path)?;
    let text = std::str::from_utf8(&bytes).map_err(|e| Error::Decode { offset: e.valid_up_to() })?;
    parse_corpus(text, format)
}

pub fn parse_corpus(input: &str, format: CorpusFormat) -> Result<Corpus> {
    let mut records = Vec::new();
    for (idx, line) in input.split('\n').enumerate() {
        let line_no = idx + 1;
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.is_empty() {
            continue;
        }
        let record = match format {
            CorpusFormat::Tsv => {
                let (label, text) = line
                    .split_once('\t')
                    .ok_or_else(|| Error::Parse { line: line_no, message: "expected `<label>\\t<text>`".into() })?;
                if text.contains('\t') {
                    return Err(Error::Parse { line: line_no, message: "text contains a tab".into() });
                }
                SentenceRecord { label: label.to_string(), text: text.to_string() }
            }
            CorpusFormat::Jsonl => serde_json::from_str::<SentenceRecord>(line)
                .map_err(|e| Error::Parse { line: line_no, message: e.to_string() })?,
        };
        record.validate().map_err(|e| match e {
            Error::Validation(m) => Error::Validation(format!("line {line_no}: {m}")),
            other => other,
        })?;
        records.push(record);
    }
    Ok(Corpus::new(records))
}

pub fn render_corpus(corpus: &Corpus, format: CorpusFormat) -> Result<String> {
    let mut out = String::new();
    for r in corpus.records() {
        match format {
            CorpusFormat::Tsv => {
                if r.text.contains(['\t', '\n', '\r']) {
                    return Err(Error::Validation(format!(
                        "TSV text may not contain tabs or line breaks (label `{}`)",
                        r.label
                    )));
                }
                out.push_str(&r.label);
                out.push('\t');
                out.push_str(&r.text);
            }
            CorpusFormat::Jsonl => out.push_str(&serde_json::to_string(r)?),
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn save_corpus(corpus: &Corpus, path: impl AsRef<Path>, format: CorpusFormat) -> Result<()> {
    let rendered = render_corpus(corpus, format)?;
    fs::write(path, rendered)?;
    Ok(())
}

/// Train/dev/test ratios and the shuffle seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    ratios: [f64; 3],
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(ratios: [f64; 3], seed: u64) -> Result<Self> {
        if ratios.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::Validation(format!("negative split ratio in {ratios:?}")));
        }
        let total: f64 = ratios.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Validation(format!("split ratios sum to {total}, expected 1")));
        }
        Ok(SplitSpec { ratios, seed })
    }

    /// Parses `"0.8,0.1,0.1"`.
    pub fn parse(ratios: &str, seed: u64) -> Result<Self> {
        let parts: Vec<f64> = ratios
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| Error::Validation(format!("bad ratio `{p}`"))))
            .collect::<Result<_>>()?;
        let ratios: [f64; 3] =
            parts.try_into().map_err(|_| Error::Validation(format!("expected three ratios, got `{ratios}`")))?;
        SplitSpec::new(ratios, seed)
    }

    pub fn ratios(&self) -> [f64; 3] {
        self.ratios
    }
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec { ratios: [0.8, 0.1, 0.1], seed: 42 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Splits {
    pub train: Corpus,
    pub dev: Corpus,
    pub test: Corpus,
}

// floor(n * r) with slack for ratios like 0.29 that land just under an integer.
fn share(n: usize, ratio: f64) -> usize {
    ((n as f64 * ratio) + 1e-9).floor() as usize
}

/// Stratified split: each label's records are shuffled with the seeded
/// generator (labels visited in sorted order), the first `floor(n*r1)` go to
/// train, the next `floor(n*r2)` to dev and the rest to test. Every part
/// keeps the input record order.
pub fn split_corpus(corpus: &Corpus, spec: &SplitSpec) -> Splits {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut part_of = vec![0u8; corpus.len()];
    for label in corpus.label_set() {
        let mut idx: Vec<usize> =
            corpus.records().iter().enumerate().filter(|(_, r)| &r.label == label).map(|(i, _)| i).collect();
        idx.shuffle(&mut rng);
        let n = idx.len();
        let n_train = share(n, spec.ratios[0]).min(n);
        let n_dev = share(n, spec.ratios[1]).min(n - n_train);
        for &i in &idx[n_train..n_train + n_dev] {
            part_of[i] = 1;
        }
        for &i in &idx[n_train + n_dev..] {
            part_of[i] = 2;
        }
    }
    let pick = |part: u8| -> Corpus {
        corpus.records().iter().zip(&part_of).filter(|(_, &p)| p == part).map(|(r, _)| r.clone()).collect()
    };
    Splits { train: pick(0), dev: pick(1), test: pick(2) }
}
