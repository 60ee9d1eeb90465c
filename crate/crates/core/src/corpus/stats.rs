use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::textproc::content_words;

/// One row of the per-language statistics table.
///
/// `chars` counts the code points of each sentence with single spaces
/// between words, so `chars - (words - sentences)` is the character mass
/// that belongs to words and punctuation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelStats {
    pub label: String,
    pub sentences: u64,
    pub words: u64,
    pub chars: u64,
    pub avg_word_len: f64,
    pub avg_sent_len: f64,
    pub unique_words: u64,
    pub ttr_words: f64,
    /// Set when the label has no words and the ratios default to 0.
    pub zero_words: bool,
}

impl LabelStats {
    /// Derives the averages and type-token ratio from raw counts.
    pub fn from_counts(label: impl Into<String>, sentences: u64, words: u64, chars: u64, unique_words: u64) -> Self {
        let avg_sent_len = if sentences == 0 { 0.0 } else { chars as f64 / sentences as f64 };
        let (avg_word_len, ttr_words) = if words == 0 {
            (0.0, 0.0)
        } else {
            let word_chars = chars as f64 - (words as f64 - sentences as f64);
            (word_chars / words as f64, unique_words as f64 / words as f64)
        };
        LabelStats {
            label: label.into(),
            sentences,
            words,
            chars,
            avg_word_len,
            avg_sent_len,
            unique_words,
            ttr_words,
            zero_words: words == 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub rows: Vec<LabelStats>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StatsFormat {
    #[default]
    Table,
    Tsv,
    Json,
}

impl FromStr for StatsFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table" => Ok(StatsFormat::Table),
            "tsv" => Ok(StatsFormat::Tsv),
            "json" => Ok(StatsFormat::Json),
            other => Err(Error::Config(format!("unknown stats format `{other}`"))),
        }
    }
}

#[derive(Default)]
struct Tally<'a> {
    sentences: u64,
    words: u64,
    chars: u64,
    vocab: HashSet<&'a str>,
}

pub fn compute_stats(corpus: &Corpus) -> CorpusStats {
    let mut per_label: BTreeMap<&str, Tally> = BTreeMap::new();
    let tokenized: Vec<Vec<String>> = corpus.texts().map(content_words).collect();
    for (record, words) in corpus.records().iter().zip(&tokenized) {
        let t = per_label.entry(&record.label).or_default();
        t.sentences += 1;
        t.words += words.len() as u64;
        let spaced_len: usize =
            record.text.split_whitespace().map(|w| w.chars().count() + 1).sum::<usize>().saturating_sub(1);
        t.chars += spaced_len as u64;
        t.vocab.extend(words.iter().map(String::as_str));
    }
    let rows = per_label
        .into_iter()
        .map(|(label, t)| LabelStats::from_counts(label, t.sentences, t.words, t.chars, t.vocab.len() as u64))
        .collect();
    CorpusStats { rows }
}

impl CorpusStats {
    pub fn render(&self, format: StatsFormat) -> Result<String> {
        let mut out = String::new();
        match format {
            StatsFormat::Table => {
                let _ = writeln!(
                    out,
                    "{:<10} {:>9} {:>9} {:>10} {:>12} {:>12} {:>13} {:>9}",
                    "lang", "#sents", "#words", "#chars", "avg_word_len", "avg_sent_len", "#unique_words", "TTR_words"
                );
                for r in &self.rows {
                    let _ = writeln!(
                        out,
                        "{:<10} {:>9} {:>9} {:>10} {:>12.3} {:>12.3} {:>13} {:>9.3}{}",
                        r.label,
                        r.sentences,
                        r.words,
                        r.chars,
                        r.avg_word_len,
                        r.avg_sent_len,
                        r.unique_words,
                        r.ttr_words,
                        if r.zero_words { "  (no words)" } else { "" }
                    );
                }
            }
            StatsFormat::Tsv => {
                out.push_str("label\tsentences\twords\tchars\tavg_word_len\tavg_sent_len\tunique_words\tttr_words\n");
                for r in &self.rows {
                    let _ = writeln!(
                        out,
                        "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                        r.label,
                        r.sentences,
                        r.words,
                        r.chars,
                        r.avg_word_len,
                        r.avg_sent_len,
                        r.unique_words,
                        r.ttr_words
                    );
                }
            }
            StatsFormat::Json => {
                out = serde_json::to_string_pretty(self)?;
                out.push('\n');
            }
        }
        Ok(out)
    }
}
