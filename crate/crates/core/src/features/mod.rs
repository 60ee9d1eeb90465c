//! Sentence featurization: word and character TF-IDF, their concatenation,
//! and hashed subwords.

mod hashed;
mod sparse;
mod tfidf;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::corpus::Corpus;
use crate::error::{Error, Result};

pub use hashed::{fnv1a32, HashedSubwords};
pub use sparse::SparseVector;
pub use tfidf::{CombinedVectorizer, NgramMode, Vectorizer, VectorizerConfig, VECTORIZER_FORMAT_VERSION};

pub fn fit_vectorizer(corpus: &Corpus, cfg: &VectorizerConfig) -> Result<Vectorizer> {
    Vectorizer::fit(corpus.texts(), cfg)
}

/// Which featurization a pipeline uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Word,
    Char,
    Combined,
    Hashed,
}

impl std::str::FromStr for FeatureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "word" => Ok(FeatureKind::Word),
            "char" => Ok(FeatureKind::Char),
            "combined" => Ok(FeatureKind::Combined),
            "hashed" => Ok(FeatureKind::Hashed),
            other => Err(Error::Config(format!("unknown feature kind `{other}`"))),
        }
    }
}

/// A fitted text-to-vector mapping, persisted separately from models so
/// several models can share one feature space.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureSpace {
    Ngram(Vectorizer),
    Combined(CombinedVectorizer),
    Hashed(HashedSubwords),
}

impl FeatureSpace {
    /// Fits the default configuration of `kind` on the corpus texts.
    pub fn fit(kind: FeatureKind, corpus: &Corpus) -> Result<Self> {
        Ok(match kind {
            FeatureKind::Word => FeatureSpace::Ngram(fit_vectorizer(corpus, &VectorizerConfig::word())?),
            FeatureKind::Char => FeatureSpace::Ngram(fit_vectorizer(corpus, &VectorizerConfig::char())?),
            FeatureKind::Combined => FeatureSpace::Combined(CombinedVectorizer::fit(
                corpus.texts(),
                &VectorizerConfig::word(),
                &VectorizerConfig::char(),
            )?),
            FeatureKind::Hashed => FeatureSpace::Hashed(HashedSubwords::default()),
        })
    }

    pub fn kind(&self) -> FeatureKind {
        match self {
            FeatureSpace::Ngram(v) if v.mode() == NgramMode::Word => FeatureKind::Word,
            FeatureSpace::Ngram(_) => FeatureKind::Char,
            FeatureSpace::Combined(_) => FeatureKind::Combined,
            FeatureSpace::Hashed(_) => FeatureKind::Hashed,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            FeatureSpace::Ngram(v) => v.dim(),
            FeatureSpace::Combined(c) => c.dim(),
            FeatureSpace::Hashed(h) => h.bucket_count,
        }
    }

    pub fn transform(&self, text: &str) -> SparseVector {
        match self {
            FeatureSpace::Ngram(v) => v.transform(text),
            FeatureSpace::Combined(c) => c.transform(text),
            FeatureSpace::Hashed(h) => h.transform(text),
        }
    }

    /// Word/char spaces serialize as the plain vectorizer document; the
    /// other kinds carry `"mode": "combined"` or `"mode": "hashed"`.
    pub fn to_json(&self) -> Result<String> {
        let value = match self {
            FeatureSpace::Ngram(v) => serde_json::to_value(v)?,
            FeatureSpace::Combined(c) => json!({
                "format_version": VECTORIZER_FORMAT_VERSION,
                "mode": "combined",
                "word_part": c.word_part,
                "char_part": c.char_part,
            }),
            FeatureSpace::Hashed(h) => json!({
                "format_version": VECTORIZER_FORMAT_VERSION,
                "mode": "hashed",
                "bucket_count": h.bucket_count,
                "word_ngrams": h.word_ngrams,
                "char_ngrams": h.char_ngrams,
            }),
        };
        Ok(serde_json::to_string(&value)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(s)?;
        let mode = value.get("mode").and_then(Value::as_str).unwrap_or_default();
        match mode {
            "word" | "char" => Ok(FeatureSpace::Ngram(serde_json::from_value(value)?)),
            "combined" => {
                let word_part: Vectorizer = serde_json::from_value(value["word_part"].clone())?;
                let char_part: Vectorizer = serde_json::from_value(value["char_part"].clone())?;
                Ok(FeatureSpace::Combined(CombinedVectorizer { word_part, char_part }))
            }
            "hashed" => {
                let h = HashedSubwords {
                    bucket_count: serde_json::from_value(value["bucket_count"].clone())?,
                    word_ngrams: serde_json::from_value(value["word_ngrams"].clone())?,
                    char_ngrams: serde_json::from_value(value["char_ngrams"].clone())?,
                };
                h.validate()?;
                Ok(FeatureSpace::Hashed(h))
            }
            other => Err(Error::Validation(format!("unknown feature space mode `{other}`"))),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        FeatureSpace::from_json(&fs::read_to_string(path)?)
    }
}
