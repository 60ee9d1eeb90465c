use serde::{Deserialize, Serialize};

use super::SparseVector;
use crate::error::{Error, Result};

/// 32-bit FNV-1a over UTF-8 bytes. Fixed constants, so bucket assignments
/// are identical on every platform and run.
pub fn fnv1a32(s: &str) -> u32 {
    let mut h: u32 = 0x811c_9dc5;
    for &b in s.as_bytes() {
        h ^= u32::from(b);
        h = h.wrapping_mul(0x0100_0193);
    }
    h
}

/// Word and marked character n-gram hashing for the subword classifier.
///
/// Each whitespace-separated word contributes its own bucket, buckets for
/// word n-grams up to `word_ngrams`, and one bucket per character n-gram of
/// `<word>` with lengths in `char_ngrams`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashedSubwords {
    pub bucket_count: usize,
    pub word_ngrams: (usize, usize),
    pub char_ngrams: (usize, usize),
}

impl Default for HashedSubwords {
    fn default() -> Self {
        HashedSubwords { bucket_count: 1 << 20, word_ngrams: (1, 1), char_ngrams: (3, 6) }
    }
}

impl HashedSubwords {
    pub fn new(bucket_count: usize) -> Result<Self> {
        let h = HashedSubwords { bucket_count, ..HashedSubwords::default() };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        if self.bucket_count < 2 || !self.bucket_count.is_power_of_two() || self.bucket_count > 1 << 31 {
            return Err(Error::Validation(format!(
                "bucket count {} is not a power of two in [2, 2^31]",
                self.bucket_count
            )));
        }
        let ok = |(lo, hi): (usize, usize)| lo >= 1 && lo <= hi;
        if !ok(self.word_ngrams) || !ok(self.char_ngrams) {
            return Err(Error::Validation("invalid n-gram range for hashed features".into()));
        }
        Ok(())
    }

    fn bucket(&self, s: &str) -> u32 {
        fnv1a32(s) & (self.bucket_count as u32 - 1)
    }

    /// Bucket indices with multiplicity, in emission order.
    pub fn buckets(&self, text: &str) -> Vec<u32> {
        let words: Vec<&str> = text.split_whitespace().collect();
        let mut out = Vec::new();
        for (i, w) in words.iter().enumerate() {
            let (lo, hi) = self.word_ngrams;
            for n in lo..=hi {
                if i + n <= words.len() {
                    out.push(self.bucket(&words[i..i + n].join(" ")));
                }
            }
            let marked: Vec<char> = std::iter::once('<').chain(w.chars()).chain(std::iter::once('>')).collect();
            let (lo, hi) = self.char_ngrams;
            for n in lo..=hi.min(marked.len()) {
                for window in marked.windows(n) {
                    let gram: String = window.iter().collect();
                    out.push(self.bucket(&gram));
                }
            }
        }
        out
    }

    /// Bucket counts as a sparse vector of dimension `bucket_count`.
    pub fn transform(&self, text: &str) -> SparseVector {
        let pairs = self.buckets(text).into_iter().map(|b| (b, 1.0)).collect();
        SparseVector::from_pairs(self.bucket_count, pairs).expect("buckets are in range")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a32(""), 0x811c9dc5);
        assert_eq!(fnv1a32("a"), 0xe40c292c);
        assert_eq!(fnv1a32("foobar"), 0xbf9cf968);
    }

    #[test]
    fn two_letter_word() {
        let h = HashedSubwords::new(1 << 20).unwrap();
        let b = h.buckets("ab");
        assert_eq!(b.len(), 4);
        let expect: Vec<u32> = ["ab", "<ab", "ab>", "<ab>"].iter().map(|g| h.bucket(g)).collect();
        assert_eq!(b, expect);
    }

    #[test]
    fn deterministic_and_total() {
        let h = HashedSubwords::default();
        assert_eq!(h.buckets("वह घर गया"), h.buckets("वह घर गया"));
        assert!(!h.buckets("qzxv never seen").is_empty());
        assert!(h.buckets("").is_empty());
        let v = h.transform("aa aa");
        assert_eq!(v.entries().iter().map(|e| e.1).sum::<f64>(), h.buckets("aa aa").len() as f64);
    }

    #[test]
    fn bucket_count_validated() {
        assert!(HashedSubwords::new(1000).is_err());
        assert!(HashedSubwords::new(1).is_err());
        assert!(HashedSubwords::new(2).is_ok());
    }
}
