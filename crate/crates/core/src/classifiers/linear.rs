//! Linear scorers: softmax regression plus two one-vs-rest hinge learners.
//!
//! All three keep each weight row as `scale * v` so the per-step L2 shrink
//! is O(1) instead of O(dim).

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{derive_seed, softmax, LabeledDataset};
use crate::error::{Error, Result};
use crate::features::SparseVector;

#[derive(Debug, Clone, PartialEq)]
pub struct LogRegConfig {
    pub lambda: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Initial rate; epoch `e` uses `learning_rate / (1 + e)`.
    pub learning_rate: f64,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        LogRegConfig { lambda: 1e-4, batch_size: 64, epochs: 20, learning_rate: 0.1 }
    }
}

/// Pegasos settings for the converged one-vs-rest SVM.
#[derive(Debug, Clone, PartialEq)]
pub struct HingeConfig {
    pub lambda: f64,
    pub epochs: usize,
}

impl Default for HingeConfig {
    fn default() -> Self {
        HingeConfig { lambda: 1e-5, epochs: 100 }
    }
}

/// Short-schedule one-vs-rest hinge SGD with step decay.
#[derive(Debug, Clone, PartialEq)]
pub struct SgdConfig {
    pub lambda: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    /// Multiplier applied every `decay_every` epochs.
    pub decay: f64,
    pub decay_every: usize,
}

impl Default for SgdConfig {
    fn default() -> Self {
        SgdConfig { lambda: 1e-4, epochs: 5, learning_rate: 0.1, decay: 0.5, decay_every: 2 }
    }
}

/// One weight row and bias per label; `score_k = w_k · v + b_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

impl LinearModel {
    pub fn new(weights: Vec<Vec<f64>>, bias: Vec<f64>) -> Result<Self> {
        let m = LinearModel { weights, bias };
        let d = m.weights.first().map_or(0, Vec::len);
        if !m.shape_ok(m.bias.len(), d) {
            return Err(Error::Validation("ragged weight matrix or bias".into()));
        }
        Ok(m)
    }

    pub fn zeros(labels: usize, dim: usize) -> Self {
        LinearModel { weights: vec![vec![0.0; dim]; labels], bias: vec![0.0; labels] }
    }

    pub fn scores(&self, v: &SparseVector) -> Vec<f64> {
        self.weights.iter().zip(&self.bias).map(|(w, b)| v.dot_dense(w) + b).collect()
    }

    pub(super) fn shape_ok(&self, k: usize, d: usize) -> bool {
        self.weights.len() == k && self.bias.len() == k && self.weights.iter().all(|w| w.len() == d)
    }
}

struct ScaledRow {
    v: Vec<f64>,
    scale: f64,
}

impl ScaledRow {
    fn new(dim: usize) -> Self {
        ScaledRow { v: vec![0.0; dim], scale: 1.0 }
    }

    /// Dot product over the sparse part; a trailing slot past `x.dim()`
    /// acts as a constant feature when present.
    fn dot(&self, x: &SparseVector) -> f64 {
        let constant = self.v.get(x.dim()).copied().unwrap_or(0.0);
        self.scale * (x.dot_dense(&self.v) + constant)
    }

    fn shrink(&mut self, factor: f64) {
        if factor <= 0.0 {
            self.v.fill(0.0);
            self.scale = 1.0;
            return;
        }
        self.scale *= factor;
        if self.scale < 1e-9 {
            for x in &mut self.v {
                *x *= self.scale;
            }
            self.scale = 1.0;
        }
    }

    fn add(&mut self, x: &SparseVector, c: f64) {
        let c = c / self.scale;
        for &(i, w) in x.entries() {
            self.v[i as usize] += c * w;
        }
        if let Some(constant) = self.v.get_mut(x.dim()) {
            *constant += c;
        }
    }

    fn into_dense(self) -> Vec<f64> {
        let s = self.scale;
        self.v.into_iter().map(|x| x * s).collect()
    }
}

/// `softmax(scores) - onehot(y)`, the per-example gradient of the
/// cross-entropy with respect to the scores.
fn residuals(scores: &[f64], y: usize) -> Vec<f64> {
    let mut r = softmax(scores);
    r[y] -= 1.0;
    r
}

/// Regularized objective `(1/n) Σ -ln p(y_i | x_i) + (λ/2) ‖W‖²`; biases
/// are not penalized.
pub fn logreg_objective(model: &LinearModel, data: &LabeledDataset, lambda: f64) -> f64 {
    let n = data.len() as f64;
    let mut loss = 0.0;
    for (x, &y) in data.vectors().iter().zip(data.labels()) {
        let s = model.scores(x);
        let max = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + s.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        loss += lse - s[y];
    }
    let penalty: f64 = model.weights.iter().flatten().map(|w| w * w).sum();
    loss / n + 0.5 * lambda * penalty
}

/// Analytic gradient of [`logreg_objective`], shaped like the model.
pub fn logreg_gradient(model: &LinearModel, data: &LabeledDataset, lambda: f64) -> LinearModel {
    let n = data.len() as f64;
    let mut grad = LinearModel::zeros(model.bias.len(), data.dim());
    for (x, &y) in data.vectors().iter().zip(data.labels()) {
        let r = residuals(&model.scores(x), y);
        for (k, rk) in r.iter().enumerate() {
            for &(f, w) in x.entries() {
                grad.weights[k][f as usize] += rk * w / n;
            }
            grad.bias[k] += rk / n;
        }
    }
    for (g, w) in grad.weights.iter_mut().zip(&model.weights) {
        for (gi, wi) in g.iter_mut().zip(w) {
            *gi += lambda * wi;
        }
    }
    grad
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive, got {value}")))
    }
}

pub(super) fn train_logreg(data: &LabeledDataset, cfg: &LogRegConfig, seed: u64) -> Result<LinearModel> {
    check_positive("lambda", cfg.lambda)?;
    check_positive("learning rate", cfg.learning_rate)?;
    if cfg.batch_size == 0 || cfg.epochs == 0 {
        return Err(Error::Config("batch size and epochs must be positive".into()));
    }
    let k = data.n_labels();
    let mut rows: Vec<ScaledRow> = (0..k).map(|_| ScaledRow::new(data.dim())).collect();
    let mut bias = vec![0.0; k];
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    for epoch in 0..cfg.epochs {
        let lr = cfg.learning_rate / (1.0 + epoch as f64);
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            let step = lr / batch.len() as f64;
            // Residuals are all taken at the batch-start parameters.
            let res: Vec<Vec<f64>> = batch
                .iter()
                .map(|&i| {
                    let x = &data.vectors()[i];
                    let scores: Vec<f64> = rows.iter().zip(&bias).map(|(r, b)| r.dot(x) + b).collect();
                    residuals(&scores, data.labels()[i])
                })
                .collect();
            for (kk, row) in rows.iter_mut().enumerate() {
                row.shrink(1.0 - lr * cfg.lambda);
                for (&i, r) in batch.iter().zip(&res) {
                    if r[kk] != 0.0 {
                        row.add(&data.vectors()[i], -step * r[kk]);
                    }
                }
            }
            for (kk, b) in bias.iter_mut().enumerate() {
                *b -= step * res.iter().map(|r| r[kk]).sum::<f64>();
            }
        }
    }
    Ok(LinearModel { weights: rows.into_iter().map(ScaledRow::into_dense).collect(), bias })
}

fn sign(label: usize, positive: usize) -> f64 {
    if label == positive {
        1.0
    } else {
        -1.0
    }
}

/// Pegasos for one label against the rest; the bias is a regularized
/// constant feature.
fn pegasos(data: &LabeledDataset, positive: usize, cfg: &HingeConfig, seed: u64) -> (Vec<f64>, f64) {
    let d = data.dim();
    let mut row = ScaledRow::new(d + 1);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = 0u64;
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (cfg.lambda * t as f64);
            let x = &data.vectors()[i];
            let y = sign(data.labels()[i], positive);
            let margin = y * row.dot(x);
            row.shrink(1.0 - eta * cfg.lambda);
            if margin < 1.0 {
                row.add(x, eta * y);
            }
        }
    }
    let mut w = row.into_dense();
    let b = w.pop().unwrap_or(0.0);
    (w, b)
}

fn hinge_sgd(data: &LabeledDataset, positive: usize, cfg: &SgdConfig, seed: u64) -> (Vec<f64>, f64) {
    let mut row = ScaledRow::new(data.dim());
    let mut b = 0.0;
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for epoch in 0..cfg.epochs {
        let lr = cfg.learning_rate * cfg.decay.powi((epoch / cfg.decay_every) as i32);
        order.shuffle(&mut rng);
        for &i in &order {
            let x = &data.vectors()[i];
            let y = sign(data.labels()[i], positive);
            let margin = y * (row.dot(x) + b);
            row.shrink(1.0 - lr * cfg.lambda);
            if margin < 1.0 {
                row.add(x, lr * y);
                b += lr * y;
            }
        }
    }
    (row.into_dense(), b)
}

fn one_vs_rest<F>(data: &LabeledDataset, seed: u64, fit: F) -> LinearModel
where
    F: Fn(usize, u64) -> (Vec<f64>, f64) + Sync,
{
    let (weights, bias) = (0..data.n_labels()).into_par_iter().map(|k| fit(k, derive_seed(seed, k as u64))).unzip();
    LinearModel { weights, bias }
}

pub(super) fn train_svm(data: &LabeledDataset, cfg: &HingeConfig, seed: u64) -> Result<LinearModel> {
    check_positive("lambda", cfg.lambda)?;
    if cfg.epochs == 0 {
        return Err(Error::Config("epochs must be positive".into()));
    }
    Ok(one_vs_rest(data, seed, |k, s| pegasos(data, k, cfg, s)))
}

pub(super) fn train_sgd(data: &LabeledDataset, cfg: &SgdConfig, seed: u64) -> Result<LinearModel> {
    check_positive("lambda", cfg.lambda)?;
    check_positive("learning rate", cfg.learning_rate)?;
    check_positive("decay", cfg.decay)?;
    if cfg.epochs == 0 || cfg.decay_every == 0 {
        return Err(Error::Config("epochs and decay interval must be positive".into()));
    }
    Ok(one_vs_rest(data, seed, |k, s| hinge_sgd(data, k, cfg, s)))
}
