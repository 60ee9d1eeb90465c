use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sorted `(index, weight)` pairs over a fixed dimensionality.
///
/// Indices are strictly increasing and below `dim`; zero weights are never
/// stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSparse", into = "RawSparse")]
pub struct SparseVector {
    dim: usize,
    entries: Vec<(u32, f64)>,
}

#[derive(Serialize, Deserialize)]
struct RawSparse {
    dim: usize,
    entries: Vec<(u32, f64)>,
}

impl TryFrom<RawSparse> for SparseVector {
    type Error = Error;

    fn try_from(raw: RawSparse) -> Result<Self> {
        SparseVector::new(raw.dim, raw.entries)
    }
}

impl From<SparseVector> for RawSparse {
    fn from(v: SparseVector) -> Self {
        RawSparse { dim: v.dim, entries: v.entries }
    }
}

impl SparseVector {
    pub fn new(dim: usize, entries: Vec<(u32, f64)>) -> Result<Self> {
        let mut prev: Option<u32> = None;
        for &(i, w) in &entries {
            if i as usize >= dim {
                return Err(Error::Validation(format!("index {i} out of range for dim {dim}")));
            }
            if prev.is_some_and(|p| p >= i) {
                return Err(Error::Validation("sparse indices must be strictly increasing".into()));
            }
            if w == 0.0 || !w.is_finite() {
                return Err(Error::Validation(format!("invalid weight {w} at index {i}")));
            }
            prev = Some(i);
        }
        Ok(SparseVector { dim, entries })
    }

    pub fn zeros(dim: usize) -> Self {
        SparseVector { dim, entries: Vec::new() }
    }

    /// Builds a vector from unordered pairs, summing repeated indices and
    /// dropping zeros.
    pub fn from_pairs(dim: usize, mut pairs: Vec<(u32, f64)>) -> Result<Self> {
        pairs.sort_by_key(|&(i, _)| i);
        let mut entries: Vec<(u32, f64)> = Vec::with_capacity(pairs.len());
        for (i, w) in pairs {
            match entries.last_mut() {
                Some(last) if last.0 == i => last.1 += w,
                _ => entries.push((i, w)),
            }
        }
        entries.retain(|&(_, w)| w != 0.0);
        SparseVector::new(dim, entries)
    }

    /// Builds a dense vector's sparse form.
    pub fn from_dense(values: &[f64]) -> Self {
        let entries = values.iter().enumerate().filter(|(_, &w)| w != 0.0).map(|(i, &w)| (i as u32, w)).collect();
        SparseVector { dim: values.len(), entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, index: u32) -> f64 {
        self.entries.binary_search_by_key(&index, |&(i, _)| i).map_or(0.0, |pos| self.entries[pos].1)
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|(_, w)| w * w).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut a, mut b) = (self.entries.iter().peekable(), other.entries.iter().peekable());
        let mut sum = 0.0;
        while let (Some(&&(i, x)), Some(&&(j, y))) = (a.peek(), b.peek()) {
            match i.cmp(&j) {
                std::cmp::Ordering::Less => {
                    a.next();
                }
                std::cmp::Ordering::Greater => {
                    b.next();
                }
                std::cmp::Ordering::Equal => {
                    sum += x * y;
                    a.next();
                    b.next();
                }
            }
        }
        sum
    }

    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, w)| w * dense[i as usize]).sum()
    }

    pub fn cosine(&self, other: &SparseVector) -> f64 {
        let denom = self.norm() * other.norm();
        if denom == 0.0 {
            0.0
        } else {
            self.dot(other) / denom
        }
    }

    pub fn scaled(&self, factor: f64) -> SparseVector {
        if factor == 0.0 {
            return SparseVector::zeros(self.dim);
        }
        SparseVector { dim: self.dim, entries: self.entries.iter().map(|&(i, w)| (i, w * factor)).collect() }
    }

    /// Unit-L2 copy; the zero vector stays zero.
    pub fn normalized(&self) -> SparseVector {
        let n = self.norm();
        if n == 0.0 {
            self.clone()
        } else {
            self.scaled(1.0 / n)
        }
    }

    /// Appends `other` after this vector's dimensions.
    pub fn concat(&self, other: &SparseVector) -> SparseVector {
        let offset = self.dim as u32;
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().map(|&(i, w)| (i + offset, w)));
        SparseVector { dim: self.dim + other.dim, entries }
    }
}
