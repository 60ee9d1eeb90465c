//! Cleaning, sentence segmentation and word tokenization.
//!
//! Cleaning is a special-character pass followed by a normalization pass.
//! The special-character pass turns every whitespace character into a plain
//! space, drops control and format characters, drops the configured symbol
//! categories and collapses space runs. Zero-width joiners survive only
//! inside words, where they are part of the spelling.

mod script;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;
use unicode_properties::{GeneralCategory, GeneralCategoryGroup, UnicodeGeneralCategory};

use crate::error::{Error, Result};

pub use script::{default_profiles, detect_script, profile_for, Script, ScriptMix, ScriptProfile};

const ZWNJ: char = '\u{200C}';
const ZWJ: char = '\u{200D}';

/// One of the four standard Unicode normalization forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum NormalizationForm {
    #[default]
    Nfc,
    Nfd,
    Nfkc,
    Nfkd,
}

impl NormalizationForm {
    fn is_compatibility(self) -> bool {
        matches!(self, NormalizationForm::Nfkc | NormalizationForm::Nfkd)
    }

    fn apply(self, s: &str) -> String {
        match self {
            NormalizationForm::Nfc => s.nfc().collect(),
            NormalizationForm::Nfd => s.nfd().collect(),
            NormalizationForm::Nfkc => s.nfkc().collect(),
            NormalizationForm::Nfkd => s.nfkd().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CleanConfig {
    pub collapse_whitespace: bool,
    pub strip_controls: bool,
    pub unicode_form: NormalizationForm,
    /// Character categories removed by the special-character pass.
    pub strip_symbols: Vec<GeneralCategory>,
}

impl Default for CleanConfig {
    fn default() -> Self {
        CleanConfig {
            collapse_whitespace: true,
            strip_controls: true,
            unicode_form: NormalizationForm::Nfc,
            strip_symbols: vec![GeneralCategory::OtherSymbol, GeneralCategory::PrivateUse, GeneralCategory::Unassigned],
        }
    }
}

/// Cleans raw bytes, reporting the offset of the first invalid UTF-8 byte.
pub fn normalize_bytes(raw: &[u8], cfg: &CleanConfig) -> Result<String> {
    let text = std::str::from_utf8(raw).map_err(|e| Error::Decode { offset: e.valid_up_to() })?;
    Ok(normalize_text(text, cfg))
}

/// Special-character pass, then normalization pass. Idempotent.
pub fn normalize_text(raw: &str, cfg: &CleanConfig) -> String {
    let mut out = normalize_form(&special_chars(raw, cfg), cfg);
    // Compatibility decompositions can emit spaces next to joiners, so those
    // forms are iterated until stable. Canonical forms settle in one pass.
    if cfg.unicode_form.is_compatibility() {
        for _ in 0..8 {
            let next = normalize_form(&special_chars(&out, cfg), cfg);
            if next == out {
                break;
            }
            out = next;
        }
    }
    out
}

fn special_chars(raw: &str, cfg: &CleanConfig) -> String {
    let kept: String = raw
        .chars()
        .filter_map(|c| {
            if c.is_whitespace() {
                return Some(if cfg.collapse_whitespace { ' ' } else { c });
            }
            let cat = c.general_category();
            if cfg.strip_controls {
                match cat {
                    GeneralCategory::Control => return None,
                    GeneralCategory::Format if c != ZWJ && c != ZWNJ => return None,
                    _ => {}
                }
            }
            if cfg.strip_symbols.contains(&cat) {
                return None;
            }
            Some(c)
        })
        .collect();

    if !cfg.collapse_whitespace {
        return kept;
    }
    let collapsed = collapse_spaces(&kept);
    if !cfg.strip_controls {
        return collapsed;
    }
    let chars: Vec<char> = collapsed.chars().collect();
    let interior = |i: usize| {
        let word_char = |c: &char| !c.is_whitespace() && *c != ZWJ && *c != ZWNJ;
        i > 0 && chars.get(i - 1).is_some_and(word_char) && chars.get(i + 1).is_some_and(word_char)
    };
    let joined: String =
        chars.iter().enumerate().filter(|&(i, &c)| !(c == ZWJ || c == ZWNJ) || interior(i)).map(|(_, &c)| c).collect();
    collapse_spaces(&joined)
}

fn normalize_form(s: &str, cfg: &CleanConfig) -> String {
    let out = cfg.unicode_form.apply(s);
    if cfg.collapse_whitespace && cfg.unicode_form.is_compatibility() {
        collapse_spaces(&out)
    } else {
        out
    }
}

fn collapse_spaces(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for word in s.split(' ').filter(|w| !w.is_empty()) {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Splits normalized text at end-of-sentence markers.
///
/// A run of delimiters ends a sentence only when followed by whitespace or
/// the end of the text (closing quotes and brackets may sit in between), so
/// decimals and abbreviations glued to the next word stay intact. The
/// delimiter stays on the sentence it ends.
pub fn split_sentences(text: &str, profiles: &[ScriptProfile]) -> Vec<String> {
    let is_delim = |c: char| profiles.iter().any(|p| p.sentence_delimiters.contains(&c));
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut sentences = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;
    while i < chars.len() {
        if !is_delim(chars[i].1) {
            i += 1;
            continue;
        }
        let mut j = i;
        while j < chars.len() && is_delim(chars[j].1) {
            j += 1;
        }
        while j < chars.len() && is_closing(chars[j].1) {
            j += 1;
        }
        if j == chars.len() || chars[j].1.is_whitespace() {
            let end = chars.get(j).map_or(text.len(), |&(b, _)| b);
            push_trimmed(&mut sentences, &text[start..end]);
            start = end;
        }
        i = j;
    }
    push_trimmed(&mut sentences, &text[start..]);
    sentences
}

fn is_closing(c: char) -> bool {
    matches!(c.general_category(), GeneralCategory::ClosePunctuation | GeneralCategory::FinalPunctuation)
        || c == '"'
        || c == '\''
}

fn push_trimmed(out: &mut Vec<String>, s: &str) {
    let s = s.trim();
    if !s.is_empty() {
        out.push(s.to_string());
    }
}

pub(crate) fn is_punctuation(c: char) -> bool {
    c.general_category_group() == GeneralCategoryGroup::Punctuation
}

fn is_word_joiner(c: char) -> bool {
    matches!(c, '-' | '\u{2010}' | '\u{2011}' | '\'' | '\u{2019}')
}

/// Whitespace split, then every punctuation mark becomes its own token.
/// Hyphens and apostrophes between two non-punctuation characters stay
/// inside the word.
pub fn tokenize_words(sentence: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for chunk in sentence.split_whitespace() {
        let chars: Vec<char> = chunk.chars().collect();
        let mut word = String::new();
        for (i, &c) in chars.iter().enumerate() {
            let internal_joiner = is_word_joiner(c)
                && i > 0
                && i + 1 < chars.len()
                && !is_punctuation(chars[i - 1])
                && !is_punctuation(chars[i + 1]);
            if is_punctuation(c) && !internal_joiner {
                if !word.is_empty() {
                    tokens.push(std::mem::take(&mut word));
                }
                tokens.push(c.to_string());
            } else {
                word.push(c);
            }
        }
        if !word.is_empty() {
            tokens.push(word);
        }
    }
    tokens
}

/// Tokens that carry at least one non-punctuation character.
pub fn content_words(sentence: &str) -> Vec<String> {
    tokenize_words(sentence).into_iter().filter(|t| !t.chars().all(is_punctuation)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn clean(s: &str) -> String {
        normalize_text(s, &CleanConfig::default())
    }

    #[test]
    fn whitespace_rules() {
        assert_eq!(clean("  a \t b  "), "a b");
        assert_eq!(clean(""), "");
        assert_eq!(clean("a\r\n\nb"), "a b");
    }

    #[test]
    fn nukta_forms_converge() {
        let decomposed = "\u{0915}\u{093C}";
        let precomposed = "\u{0958}";
        assert_eq!(clean(decomposed), clean(precomposed));
    }

    #[test]
    fn controls_and_symbols_removed() {
        assert_eq!(clean("a\u{0007}b"), "ab");
        assert_eq!(clean("hi \u{1F600} there"), "hi there");
        assert_eq!(clean("x\u{FEFF}y"), "xy");
    }

    #[test]
    fn joiners_kept_inside_words_only() {
        // क्‍ष with an explicit ZWJ keeps it.
        let inner = "\u{0915}\u{094D}\u{200D}\u{0937}";
        assert_eq!(clean(inner), inner);
        assert_eq!(clean("\u{200D}abc \u{200C}"), "abc");
        assert_eq!(clean("a \u{200D} b"), "a b");
    }

    #[test]
    fn invalid_utf8_reports_offset() {
        let err = normalize_bytes(b"ab\xffcd", &CleanConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Decode { offset: 2 }));
    }

    #[test]
    fn sentence_examples() {
        let p = default_profiles();
        assert_eq!(split_sentences("राम घर गया। वह सो गया।", &p), vec!["राम घर गया।", "वह सो गया।"]);
        assert_eq!(split_sentences("Hello. Bye.", &p), vec!["Hello.", "Bye."]);
        assert_eq!(split_sentences("no delimiter here", &p), vec!["no delimiter here"]);
        assert!(split_sentences("", &p).is_empty());
    }

    #[test]
    fn sentence_edge_cases() {
        let p = default_profiles();
        assert_eq!(split_sentences("Pi is 3.14 ok.", &p), vec!["Pi is 3.14 ok."]);
        assert_eq!(split_sentences("Why?! Yes.", &p), vec!["Why?!", "Yes."]);
        assert_eq!(split_sentences("He said \"hi.\" Then left.", &p).len(), 2);
        assert_eq!(split_sentences("یہ ہے۔ وہ ہے۔", &p), vec!["یہ ہے۔", "وہ ہے۔"]);
        assert_eq!(split_sentences("ᱟ ᱾ ᱵ ᱿", &p), vec!["ᱟ ᱾", "ᱵ ᱿"]);
    }

    #[test]
    fn token_examples() {
        assert_eq!(tokenize_words("वह घर गया।"), vec!["वह", "घर", "गया", "।"]);
        assert_eq!(tokenize_words("a,b"), vec!["a", ",", "b"]);
        assert!(tokenize_words("").is_empty());
        assert_eq!(tokenize_words("don't well-known -x"), vec!["don't", "well-known", "-", "x"]);
        assert_eq!(tokenize_words("(hi)..."), vec!["(", "hi", ")", ".", ".", "."]);
        assert_eq!(content_words("वह घर गया ।"), vec!["वह", "घर", "गया"]);
    }

    proptest! {
        #[test]
        fn normalize_idempotent(s in "\\PC{0,40}|[ \t\n\u{200C}\u{200D}a-z\u{0900}-\u{097F}]{0,40}") {
            let once = clean(&s);
            prop_assert_eq!(clean(&once), once.clone());
            prop_assert!(!once.contains("  "));
            prop_assert_eq!(once.trim(), once.as_str());
            prop_assert!(!once.chars().any(|c| c.is_control()));
        }

        #[test]
        fn compat_forms_idempotent(s in any::<String>()) {
            for form in [NormalizationForm::Nfd, NormalizationForm::Nfkc, NormalizationForm::Nfkd] {
                let cfg = CleanConfig { unicode_form: form, ..CleanConfig::default() };
                let once = normalize_text(&s, &cfg);
                prop_assert_eq!(normalize_text(&once, &cfg), once);
            }
        }

        #[test]
        fn split_keeps_content(s in "[a-z\u{0915}-\u{0920} .!?\u{0964}\u{0965}]{0,60}") {
            let text = clean(&s);
            let sentences = split_sentences(&text, &default_profiles());
            prop_assert!(sentences.iter().all(|x| !x.is_empty()));
            prop_assert_eq!(sentences.join(" "), text);
        }

        #[test]
        fn tokenize_fixed_point(s in "[a-z'\\-,.!()\u{0964} ]{0,40}") {
            let tokens = tokenize_words(&s);
            prop_assert!(tokens.iter().all(|t| !t.is_empty() && !t.contains(char::is_whitespace)));
            let again = tokenize_words(&tokens.join(" "));
            prop_assert_eq!(again, tokens);
        }
    }
}
