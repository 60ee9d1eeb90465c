use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::SparseVector;
use crate::error::{Error, Result};
use crate::textproc::tokenize_words;

pub const VECTORIZER_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NgramMode {
    /// Token n-grams joined by single spaces.
    Word,
    /// Code-point n-grams over the whole sentence, spaces included.
    Char,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VectorizerConfig {
    pub mode: NgramMode,
    pub ngram_range: (usize, usize),
    pub min_df: usize,
    /// Keep only the K most frequent n-grams (by document frequency).
    pub max_features: Option<usize>,
}

impl VectorizerConfig {
    /// Word uni- and bi-grams.
    pub fn word() -> Self {
        VectorizerConfig { mode: NgramMode::Word, ngram_range: (1, 2), min_df: 1, max_features: None }
    }

    /// Character 2- to 6-grams.
    pub fn char() -> Self {
        VectorizerConfig { mode: NgramMode::Char, ngram_range: (2, 6), min_df: 1, max_features: None }
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.ngram_range;
        if lo == 0 || hi < lo {
            return Err(Error::Validation(format!("invalid n-gram range ({lo}, {hi})")));
        }
        if self.max_features == Some(0) {
            return Err(Error::Validation("max_features must be positive".into()));
        }
        Ok(())
    }
}

/// Calls `f` on every n-gram of `text`, repeats included.
fn for_each_ngram(mode: NgramMode, (lo, hi): (usize, usize), text: &str, mut f: impl FnMut(&str)) {
    match mode {
        NgramMode::Char => {
            let bounds: Vec<usize> = text.char_indices().map(|(b, _)| b).chain(std::iter::once(text.len())).collect();
            let n_chars = bounds.len() - 1;
            for n in lo..=hi.min(n_chars) {
                for start in 0..=n_chars - n {
                    f(&text[bounds[start]..bounds[start + n]]);
                }
            }
        }
        NgramMode::Word => {
            let tokens = tokenize_words(text);
            let mut buf = String::new();
            for n in lo..=hi.min(tokens.len()) {
                for window in tokens.windows(n) {
                    buf.clear();
                    for (k, t) in window.iter().enumerate() {
                        if k > 0 {
                            buf.push(' ');
                        }
                        buf.push_str(t);
                    }
                    f(&buf);
                }
            }
        }
    }
}

/// A fitted n-gram vocabulary with smoothed IDF weights.
///
/// Vocabulary indices follow the lexicographic order of the n-gram strings
/// and `idf[i] = ln((1 + N) / (1 + df_i)) + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VectorizerFile", into = "VectorizerFile")]
pub struct Vectorizer {
    mode: NgramMode,
    ngram_range: (usize, usize),
    terms: Vec<String>,
    index: HashMap<String, u32>,
    idf: Vec<f64>,
    min_df: usize,
    doc_count_fitted: usize,
}

impl Vectorizer {
    pub fn fit<'a, I>(texts: I, cfg: &VectorizerConfig) -> Result<Self>
    where
        I: IntoIterator<Item = &'a str>,
    {
        cfg.validate()?;
        let mut df: HashMap<String, usize> = HashMap::new();
        let mut docs = 0usize;
        let mut seen: HashSet<String> = HashSet::new();
        for text in texts {
            docs += 1;
            seen.clear();
            for_each_ngram(cfg.mode, cfg.ngram_range, text, |g| {
                if !seen.contains(g) {
                    seen.insert(g.to_string());
                }
            });
            for g in seen.drain() {
                *df.entry(g).or_default() += 1;
            }
        }
        if docs == 0 {
            return Err(Error::Validation("cannot fit a vectorizer on an empty corpus".into()));
        }

        let mut kept: Vec<(String, usize)> = df.into_iter().filter(|&(_, d)| d >= cfg.min_df).collect();
        if let Some(k) = cfg.max_features {
            kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            kept.truncate(k);
        }
        kept.sort_by(|a, b| a.0.cmp(&b.0));

        let n = docs as f64;
        let idf = kept.iter().map(|&(_, d)| ((1.0 + n) / (1.0 + d as f64)).ln() + 1.0).collect();
        let terms: Vec<String> = kept.into_iter().map(|(g, _)| g).collect();
        Ok(Vectorizer {
            mode: cfg.mode,
            ngram_range: cfg.ngram_range,
            index: index_of(&terms),
            terms,
            idf,
            min_df: cfg.min_df,
            doc_count_fitted: docs,
        })
    }

    pub fn mode(&self) -> NgramMode {
        self.mode
    }

    pub fn ngram_range(&self) -> (usize, usize) {
        self.ngram_range
    }

    pub fn dim(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn idf(&self) -> &[f64] {
        &self.idf
    }

    pub fn index_of(&self, ngram: &str) -> Option<u32> {
        self.index.get(ngram).copied()
    }

    pub fn doc_count_fitted(&self) -> usize {
        self.doc_count_fitted
    }

    /// Raw count times IDF per in-vocabulary n-gram, L2-normalized.
    pub fn transform(&self, text: &str) -> SparseVector {
        let mut hits: Vec<u32> = Vec::new();
        for_each_ngram(self.mode, self.ngram_range, text, |g| {
            if let Some(&i) = self.index.get(g) {
                hits.push(i);
            }
        });
        hits.sort_unstable();
        let mut entries: Vec<(u32, f64)> = Vec::new();
        for i in hits {
            match entries.last_mut() {
                Some(last) if last.0 == i => last.1 += 1.0,
                _ => entries.push((i, 1.0)),
            }
        }
        for e in &mut entries {
            e.1 *= self.idf[e.0 as usize];
        }
        SparseVector::new(self.dim(), entries).expect("indices come from the vocabulary").normalized()
    }
}

fn index_of(terms: &[String]) -> HashMap<String, u32> {
    terms.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect()
}

#[derive(Serialize, Deserialize)]
struct VectorizerFile {
    format_version: u32,
    mode: NgramMode,
    ngram_range: (usize, usize),
    vocabulary: BTreeMap<String, u32>,
    idf: Vec<f64>,
    min_df: usize,
    doc_count_fitted: usize,
}

impl From<Vectorizer> for VectorizerFile {
    fn from(v: Vectorizer) -> Self {
        VectorizerFile {
            format_version: VECTORIZER_FORMAT_VERSION,
            mode: v.mode,
            ngram_range: v.ngram_range,
            vocabulary: v.index.into_iter().collect(),
            idf: v.idf,
            min_df: v.min_df,
            doc_count_fitted: v.doc_count_fitted,
        }
    }
}

impl TryFrom<VectorizerFile> for Vectorizer {
    type Error = Error;

    fn try_from(f: VectorizerFile) -> Result<Self> {
        if f.format_version != VECTORIZER_FORMAT_VERSION {
            return Err(Error::Validation(format!("unsupported vectorizer format version {}", f.format_version)));
        }
        if f.idf.len() != f.vocabulary.len() || f.idf.iter().any(|&w| w.is_nan() || w <= 0.0) {
            return Err(Error::Validation("idf weights do not match the vocabulary".into()));
        }
        let mut terms = vec![String::new(); f.vocabulary.len()];
        let mut filled = vec![false; terms.len()];
        for (term, &i) in &f.vocabulary {
            let slot = i as usize;
            if slot >= terms.len() || filled[slot] {
                return Err(Error::Validation("vocabulary indices are not contiguous".into()));
            }
            terms[slot] = term.clone();
            filled[slot] = true;
        }
        Ok(Vectorizer {
            mode: f.mode,
            ngram_range: f.ngram_range,
            index: index_of(&terms),
            terms,
            idf: f.idf,
            min_df: f.min_df,
            doc_count_fitted: f.doc_count_fitted,
        })
    }
}

/// Word and character vectorizers whose outputs are concatenated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinedVectorizer {
    pub word_part: Vectorizer,
    pub char_part: Vectorizer,
}

impl CombinedVectorizer {
    pub fn fit<'a, I>(texts: I, word: &VectorizerConfig, chars: &VectorizerConfig) -> Result<Self>
    where
        I: IntoIterator<Item = &'a str> + Clone,
    {
        Ok(CombinedVectorizer {
            word_part: Vectorizer::fit(texts.clone(), word)?,
            char_part: Vectorizer::fit(texts, chars)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.word_part.dim() + self.char_part.dim()
    }

    /// Each part is unit-normalized on its own, then the concatenation is
    /// normalized again.
    pub fn transform(&self, text: &str) -> SparseVector {
        self.word_part.transform(text).concat(&self.char_part.transform(text)).normalized()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn word_unigrams(min_df: usize) -> VectorizerConfig {
        VectorizerConfig { ngram_range: (1, 1), min_df, ..VectorizerConfig::word() }
    }

    #[test]
    fn idf_hand_values() {
        let vz = Vectorizer::fit(["a b", "a c"], &word_unigrams(1)).unwrap();
        assert_eq!(vz.terms(), ["a", "b", "c"]);
        assert_eq!(vz.idf()[0], 1.0);
        assert!((vz.idf()[1] - ((1.5f64).ln() + 1.0)).abs() < 1e-15);
        assert!((vz.idf()[1] - 1.405).abs() < 1e-3);
    }

    #[test]
    fn single_doc_idf_is_one() {
        for cfg in [VectorizerConfig::word(), VectorizerConfig::char()] {
            let vz = Vectorizer::fit(["राम घर गया।"], &cfg).unwrap();
            assert!(vz.idf().iter().all(|&w| w == 1.0));
        }
    }

    #[test]
    fn min_df_threshold() {
        let vz = Vectorizer::fit(["a b", "a c"], &word_unigrams(2)).unwrap();
        assert_eq!(vz.terms(), ["a"]);
    }

    #[test]
    fn fit_errors() {
        let empty: [&str; 0] = [];
        assert!(Vectorizer::fit(empty, &VectorizerConfig::char()).is_err());
        let bad = VectorizerConfig { ngram_range: (3, 2), ..VectorizerConfig::char() };
        assert!(Vectorizer::fit(["ab"], &bad).is_err());
    }

    #[test]
    fn bigrams_and_char_grams() {
        let vz = Vectorizer::fit(["a b", "a c"], &VectorizerConfig::word()).unwrap();
        assert_eq!(vz.terms(), ["a", "a b", "a c", "b", "c"]);
        let cz =
            Vectorizer::fit(["ab c"], &VectorizerConfig { ngram_range: (2, 3), ..VectorizerConfig::char() }).unwrap();
        assert_eq!(cz.terms(), [" c", "ab", "ab ", "b ", "b c"]);
    }

    #[test]
    fn transform_examples() {
        let vz = Vectorizer::fit(["a b", "a c"], &word_unigrams(1)).unwrap();
        assert!(vz.transform("zzz").is_zero());
        assert_eq!(vz.transform("zzz").dim(), 3);
        let v = vz.transform("b b");
        assert_eq!(v.entries(), &[(1, 1.0)]);
        let v = vz.transform("a b");
        assert!((v.norm() - 1.0).abs() < 1e-12);
        assert!(v.get(1) > v.get(0));
    }

    #[test]
    fn combined_dims_and_norm() {
        let docs = ["ab cd", "cd ef."];
        let cv = CombinedVectorizer::fit(docs, &VectorizerConfig::word(), &VectorizerConfig::char()).unwrap();
        assert_eq!(cv.dim(), cv.word_part.dim() + cv.char_part.dim());
        assert!(cv.transform("").is_zero());
        assert_eq!(cv.transform("").dim(), cv.dim());
        let v = cv.transform("ab ef");
        assert!((v.norm() - 1.0).abs() < 1e-9);
        assert!(v.entries().iter().any(|&(i, _)| (i as usize) < cv.word_part.dim()));
        assert!(v.entries().iter().any(|&(i, _)| (i as usize) >= cv.word_part.dim()));
        // Two unit blocks concatenated have norm sqrt(2) before renormalizing.
        let w = cv.word_part.transform("ab ef");
        let c = cv.char_part.transform("ab ef");
        assert!((w.concat(&c).norm() - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let vz = Vectorizer::fit(["वह घर गया।", "a c"], &VectorizerConfig::char()).unwrap();
        let json = serde_json::to_string(&vz).unwrap();
        let back: Vectorizer = serde_json::from_str(&json).unwrap();
        assert_eq!(back, vz);
        assert_eq!(serde_json::to_string(&back).unwrap(), json);
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        for key in ["format_version", "mode", "ngram_range", "vocabulary", "idf", "min_df", "doc_count_fitted"] {
            assert!(value.get(key).is_some(), "{key}");
        }
    }

    proptest! {
        #[test]
        fn fitted_docs_are_nonzero(docs in prop::collection::vec("[a-e]{1,4}( [a-e]{1,4}){0,4}", 1..8)) {
            for cfg in [VectorizerConfig::word(), VectorizerConfig::char()] {
                let vz = Vectorizer::fit(docs.iter().map(String::as_str), &cfg).unwrap();
                let again = Vectorizer::fit(docs.iter().map(String::as_str), &cfg).unwrap();
                prop_assert_eq!(&vz, &again);
                prop_assert!(vz.idf().iter().all(|&w| w > 0.0));
                prop_assert!(vz.terms().windows(2).all(|w| w[0] < w[1]));
                for d in &docs {
                    if cfg.mode == NgramMode::Char && d.chars().count() < 2 {
                        continue;
                    }
                    let v = vz.transform(d);
                    prop_assert!((v.norm() - 1.0).abs() < 1e-9);
                    prop_assert_eq!(v, vz.transform(d));
                }
            }
        }
    }
}
