use std::collections::{BTreeMap, HashSet};
use std::fmt;

use crate::classifiers::TrainedModel;
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::features::FeatureSpace;
use crate::textproc::{
    content_words, default_profiles, detect_script, normalize_text, CleanConfig, Script, ScriptProfile,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    Duplicate,
    TooShort,
    ScriptMismatch,
    LowConfidence,
}

impl RejectReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::Duplicate => "duplicate",
            RejectReason::TooShort => "too_short",
            RejectReason::ScriptMismatch => "script_mismatch",
            RejectReason::LowConfidence => "low_confidence",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A dropped record; `line` is its 1-based position in the filtered corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rejection {
    pub line: usize,
    pub reason: RejectReason,
}

/// Renders a rejection log as `<line>\t<reason>` rows.
pub fn write_rejections(log: &[Rejection]) -> String {
    log.iter().map(|r| format!("{}\t{}\n", r.line, r.reason)).collect()
}

/// Writing system expected for each label of the default schema.
pub fn default_expected_scripts() -> BTreeMap<String, Script> {
    use Script::*;
    [
        ("asm", Bengali),
        ("ben", Bengali),
        ("brx", Devanagari),
        ("doi", Devanagari),
        ("eng", Latin),
        ("gom", Devanagari),
        ("guj", Gujarati),
        ("hin", Devanagari),
        ("kan", Kannada),
        ("kas", PersoArabic),
        ("mai", Devanagari),
        ("mal", Malayalam),
        ("mar", Devanagari),
        ("mni_Beng", Bengali),
        ("mni_Mtei", MeeteiMayek),
        ("npi", Devanagari),
        ("ory", Odia),
        ("pan", Gurmukhi),
        ("san", Devanagari),
        ("sat", OlChiki),
        ("snd_Arab", PersoArabic),
        ("snd_Deva", Devanagari),
        ("tam", Tamil),
        ("tel", Telugu),
        ("urd", PersoArabic),
    ]
    .into_iter()
    .map(|(l, s)| (l.to_string(), s))
    .collect()
}

/// Thresholds for the duplicate / short / wrong-script pass.
#[derive(Debug, Clone)]
pub struct NoiseFilter {
    pub min_chars: usize,
    pub min_words: usize,
    /// Minimum share of letters in the label's expected script.
    pub script_purity: f64,
    pub profiles: Vec<ScriptProfile>,
    pub expected_script: BTreeMap<String, Script>,
}

impl Default for NoiseFilter {
    fn default() -> Self {
        NoiseFilter {
            min_chars: 10,
            min_words: 3,
            script_purity: 0.7,
            profiles: default_profiles(),
            expected_script: default_expected_scripts(),
        }
    }
}

/// Drops short records, records below the script-purity threshold and later
/// exact duplicates (per label, compared after normalization), in that
/// order of precedence.
pub fn noise_filter(corpus: &Corpus, cfg: &NoiseFilter) -> Result<(Corpus, Vec<Rejection>)> {
    if !(0.0..=1.0).contains(&cfg.script_purity) {
        return Err(Error::Config(format!("script purity {} outside [0, 1]", cfg.script_purity)));
    }
    if let Some(missing) = corpus.label_set().iter().find(|l| !cfg.expected_script.contains_key(*l)) {
        return Err(Error::Config(format!("no expected script configured for label `{missing}`")));
    }

    let clean = CleanConfig::default();
    let mut seen: HashSet<(&str, String)> = HashSet::new();
    let mut kept = Vec::new();
    let mut log = Vec::new();
    for (i, record) in corpus.records().iter().enumerate() {
        let reason = if record.text.chars().count() < cfg.min_chars || content_words(&record.text).len() < cfg.min_words
        {
            Some(RejectReason::TooShort)
        } else if detect_script(&record.text, &cfg.profiles).fraction(cfg.expected_script[&record.label])
            < cfg.script_purity
        {
            Some(RejectReason::ScriptMismatch)
        } else if !seen.insert((&record.label, normalize_text(&record.text, &clean))) {
            Some(RejectReason::Duplicate)
        } else {
            None
        };
        match reason {
            Some(reason) => log.push(Rejection { line: i + 1, reason }),
            None => kept.push(record.clone()),
        }
    }
    Ok((Corpus::new(kept), log))
}

/// Keeps a record iff the model gives its own label probability ≥ threshold.
pub fn confidence_filter(
    corpus: &Corpus,
    features: &FeatureSpace,
    model: &TrainedModel,
    threshold: f64,
) -> Result<(Corpus, Vec<Rejection>)> {
    if !model.supports_probability() {
        return Err(Error::Capability(format!("{} models do not produce probabilities", model.kind())));
    }
    if let Some(missing) = corpus.label_set().iter().find(|l| model.label_index(l).is_none()) {
        return Err(Error::Validation(format!("model does not know label `{missing}`")));
    }
    let mut kept = Vec::new();
    let mut log = Vec::new();
    for (i, record) in corpus.records().iter().enumerate() {
        let probs = model.predict_proba(&features.transform(&record.text))?;
        if probs[&record.label] >= threshold {
            kept.push(record.clone());
        } else {
            log.push(Rejection { line: i + 1, reason: RejectReason::LowConfidence });
        }
    }
    Ok((Corpus::new(kept), log))
}
