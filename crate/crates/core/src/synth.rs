//! Synthetic multilingual corpora for end-to-end checks.
//!
//! Each pseudo-language draws its words from its own Unicode block, so the
//! languages share no letters and a good classifier separates them
//! perfectly.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use unicode_normalization::UnicodeNormalization;
use unicode_properties::{GeneralCategory, UnicodeGeneralCategory};

use crate::classifiers::derive_seed;
use crate::corpus::{Corpus, SentenceRecord, DEFAULT_LABELS};
use crate::error::{Error, Result};

/// First code point scanned for each pseudo-language's alphabet.
const BLOCK_STARTS: [u32; 25] = [
    0x0061, 0x03B1, 0x0430, 0x0561, 0x05D0, 0x0620, 0x0904, 0x0985, 0x0A05, 0x0A85, 0x0B05, 0x0B85, 0x0C05, 0x0C85,
    0x0D05, 0x0D85, 0x0E01, 0x0F40, 0x1000, 0x10D0, 0x1200, 0x13A0, 0x1401, 0x1C5A, 0xAC00,
];

const ALPHABET_SIZE: usize = 20;
const VOCABULARY: usize = 60;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub languages: usize,
    pub sentences: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig { languages: 25, sentences: 200, seed: 42 }
    }
}

/// `ALPHABET_SIZE` cased or other letters from the block starting at
/// `start`, each stable under NFC.
pub fn alphabet(start: u32) -> Vec<char> {
    (start..start + 0x100)
        .filter_map(char::from_u32)
        .filter(|&c| {
            matches!(
                c.general_category(),
                GeneralCategory::LowercaseLetter | GeneralCategory::UppercaseLetter | GeneralCategory::OtherLetter
            ) && std::iter::once(c).nfc().eq(std::iter::once(c))
        })
        .take(ALPHABET_SIZE)
        .collect()
}

/// Labelled sentences for the first `languages` default labels, grouped by
/// label.
pub fn generate(cfg: &SynthConfig) -> Result<Corpus> {
    if cfg.languages == 0 || cfg.languages > BLOCK_STARTS.len() {
        return Err(Error::Config(format!(
            "language count must be within 1..={}, got {}",
            BLOCK_STARTS.len(),
            cfg.languages
        )));
    }
    let mut records = Vec::with_capacity(cfg.languages * cfg.sentences);
    for (i, (&label, &start)) in DEFAULT_LABELS.iter().zip(&BLOCK_STARTS).take(cfg.languages).enumerate() {
        let letters = alphabet(start);
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, i as u64));
        let vocab: Vec<String> = (0..VOCABULARY)
            .map(|_| {
                let len = rng.random_range(2..=7);
                (0..len).map(|_| letters[rng.random_range(0..letters.len())]).collect()
            })
            .collect();
        for _ in 0..cfg.sentences {
            let n = rng.random_range(4..=12);
            let words: Vec<&str> = (0..n).map(|_| vocab[rng.random_range(0..vocab.len())].as_str()).collect();
            records.push(SentenceRecord::new(label, format!("{}.", words.join(" ")))?);
        }
    }
    Ok(Corpus::new(records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn alphabets_are_full_and_disjoint() {
        let mut seen = HashSet::new();
        for &start in &BLOCK_STARTS {
            let a = alphabet(start);
            assert_eq!(a.len(), ALPHABET_SIZE, "block {start:#x}");
            for c in a {
                assert!(seen.insert(c));
            }
        }
    }

    #[test]
    fn shape_and_determinism() {
        let cfg = SynthConfig { languages: 3, sentences: 10, seed: 1 };
        let c = generate(&cfg).unwrap();
        assert_eq!(c.len(), 30);
        assert_eq!(c.label_set().len(), 3);
        assert_eq!(c, generate(&cfg).unwrap());
        assert_ne!(c, generate(&SynthConfig { seed: 2, ..cfg }).unwrap());
        for t in c.texts() {
            let words = t.split(' ').count();
            assert!((4..=12).contains(&words));
            assert!(t.ends_with('.'));
        }
    }

    #[test]
    fn bad_counts() {
        assert!(generate(&SynthConfig { languages: 26, ..SynthConfig::default() }).is_err());
        assert!(generate(&SynthConfig { languages: 0, ..SynthConfig::default() }).is_err());
    }
}
