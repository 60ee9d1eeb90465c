//! Shallow embedding classifier in the style of fastText: the hidden layer
//! is the weight-averaged embedding of the input buckets, followed by a
//! softmax output layer.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{derive_seed, LabeledDataset};
use crate::error::{Error, Result};
use crate::features::SparseVector;

#[derive(Debug, Clone, PartialEq)]
pub struct FtConfig {
    pub dim: usize,
    pub epochs: usize,
    /// Starting rate, decayed linearly to zero over all updates.
    pub learning_rate: f32,
}

impl Default for FtConfig {
    fn default() -> Self {
        FtConfig { dim: 64, epochs: 5, learning_rate: 0.1 }
    }
}

/// Only rows touched in training are stored; any other row is regenerated
/// from `(seed, bucket)` on demand, so unseen buckets cost no memory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FtStyle {
    pub dim: usize,
    pub seed: u64,
    pub rows: BTreeMap<u32, Vec<f32>>,
    pub output: Vec<Vec<f32>>,
}

/// Initial embedding of a bucket, uniform in `±1/dim`.
pub fn initial_row(seed: u64, bucket: u32, dim: usize) -> Vec<f32> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, bucket as u64));
    let bound = 1.0 / dim as f32;
    (0..dim).map(|_| rng.random_range(-bound..bound)).collect()
}

fn weight_mass(v: &SparseVector) -> f32 {
    v.entries().iter().map(|(_, w)| w.abs() as f32).sum()
}

fn softmax32(scores: &[f32]) -> Vec<f32> {
    let max = scores.iter().copied().fold(f32::NEG_INFINITY, f32::max);
    let exps: Vec<f32> = scores.iter().map(|s| (s - max).exp()).collect();
    let z: f32 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}

pub(super) fn train(data: &LabeledDataset, cfg: &FtConfig, seed: u64) -> Result<FtStyle> {
    if cfg.dim == 0 || cfg.epochs == 0 || !(cfg.learning_rate > 0.0 && cfg.learning_rate.is_finite()) {
        return Err(Error::Config("embedding dim, epochs and learning rate must be positive".into()));
    }
    let mut model =
        FtStyle { dim: cfg.dim, seed, rows: BTreeMap::new(), output: vec![vec![0.0; cfg.dim]; data.n_labels()] };
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = (cfg.epochs * data.len()) as f32;
    let mut step = 0usize;
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let lr = cfg.learning_rate * (1.0 - step as f32 / total);
            step += 1;
            let x = &data.vectors()[i];
            let mass = weight_mass(x);
            if mass == 0.0 {
                continue;
            }
            for &(f, _) in x.entries() {
                model.rows.entry(f).or_insert_with(|| initial_row(seed, f, cfg.dim));
            }
            let h = model.hidden(x);
            let mut g = softmax32(&model.scores(&h));
            g[data.labels()[i]] -= 1.0;

            let mut grad_h = vec![0.0f32; cfg.dim];
            for (out, gk) in model.output.iter_mut().zip(&g) {
                for ((gh, o), hj) in grad_h.iter_mut().zip(out.iter_mut()).zip(&h) {
                    *gh += gk * *o;
                    *o -= lr * gk * hj;
                }
            }
            for &(f, w) in x.entries() {
                let c = lr * w as f32 / mass;
                let row = model.rows.get_mut(&f).expect("row materialized above");
                for (r, gh) in row.iter_mut().zip(&grad_h) {
                    *r -= c * gh;
                }
            }
        }
    }
    Ok(model)
}

impl FtStyle {
    pub fn hidden(&self, v: &SparseVector) -> Vec<f32> {
        let mut h = vec![0.0f32; self.dim];
        let mass = weight_mass(v);
        if mass == 0.0 {
            return h;
        }
        for &(f, w) in v.entries() {
            let c = w as f32 / mass;
            let fresh;
            let row = match self.rows.get(&f) {
                Some(r) => r,
                None => {
                    fresh = initial_row(self.seed, f, self.dim);
                    &fresh
                }
            };
            for (hj, r) in h.iter_mut().zip(row) {
                *hj += c * r;
            }
        }
        h
    }

    fn scores(&self, h: &[f32]) -> Vec<f32> {
        self.output.iter().map(|o| o.iter().zip(h).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn proba(&self, v: &SparseVector) -> Vec<f64> {
        let p = softmax32(&self.scores(&self.hidden(v)));
        let p: Vec<f64> = p.into_iter().map(f64::from).collect();
        // Renormalize in f64 so the sum is exact to double precision.
        let z: f64 = p.iter().sum();
        p.into_iter().map(|x| x / z).collect()
    }

    pub(super) fn shape_ok(&self, k: usize, d: usize) -> bool {
        self.dim > 0
            && self.output.len() == k
            && self.output.iter().all(|o| o.len() == self.dim)
            && self.rows.iter().all(|(&f, r)| (f as usize) < d && r.len() == self.dim)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::testutil::disjoint;
    use crate::features::HashedSubwords;

    #[test]
    fn initial_rows_are_pure_and_bounded() {
        let a = initial_row(5, 17, 8);
        assert_eq!(a, initial_row(5, 17, 8));
        assert_ne!(a, initial_row(5, 18, 8));
        assert!(a.iter().all(|x| x.abs() <= 1.0 / 8.0));
    }

    #[test]
    fn unseen_buckets_predict_without_error() {
        let hs = HashedSubwords::new(1 << 10).unwrap();
        let data = LabeledDataset::new(
            vec![hs.transform("alpha beta"), hs.transform("gamma delta")],
            vec![0, 1],
            vec!["aaa".into(), "bbb".into()],
        )
        .unwrap();
        let m = train(&data, &FtConfig::default(), 3).unwrap();
        let p = m.proba(&hs.transform("entirely novel words"));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn learns_disjoint_data() {
        let data = disjoint(3, 6);
        let cfg = FtConfig { epochs: 50, ..FtConfig::default() };
        let m = train(&data, &cfg, 1).unwrap();
        for (x, &y) in data.vectors().iter().zip(data.labels()) {
            let p = m.proba(x);
            assert!(p.iter().enumerate().all(|(k, &pk)| k == y || pk < p[y]));
        }
    }
}
