use serde::{Deserialize, Serialize};

use super::{softmax, LabeledDataset};
use crate::error::{Error, Result};
use crate::features::SparseVector;

#[derive(Debug, Clone, PartialEq)]
pub struct NbConfig {
    /// Additive (Laplace) smoothing.
    pub alpha: f64,
}

impl Default for NbConfig {
    fn default() -> Self {
        NbConfig { alpha: 1.0 }
    }
}

/// Multinomial naive Bayes over non-negative feature weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayes {
    pub log_prior: Vec<f64>,
    /// `log_likelihood[k][f] = ln θ_kf`.
    pub log_likelihood: Vec<Vec<f64>>,
}

pub(super) fn train(data: &LabeledDataset, cfg: &NbConfig) -> Result<NaiveBayes> {
    if !(cfg.alpha > 0.0 && cfg.alpha.is_finite()) {
        return Err(Error::Config(format!("smoothing must be positive, got {}", cfg.alpha)));
    }
    let k = data.n_labels();
    let d = data.dim();
    let mut class_docs = vec![0usize; k];
    let mut mass = vec![vec![0.0; d]; k];
    for (v, &y) in data.vectors().iter().zip(data.labels()) {
        class_docs[y] += 1;
        for &(f, w) in v.entries() {
            if w < 0.0 {
                return Err(Error::Validation(format!("naive Bayes needs non-negative features, got {w} at {f}")));
            }
            mass[y][f as usize] += w;
        }
    }
    let n = data.len() as f64;
    let log_prior = class_docs.iter().map(|&c| (c as f64 / n).ln()).collect();
    let log_likelihood = mass
        .into_iter()
        .map(|row| {
            let total: f64 = row.iter().sum::<f64>() + cfg.alpha * d as f64;
            let ln_total = total.ln();
            row.into_iter().map(|m| (m + cfg.alpha).ln() - ln_total).collect()
        })
        .collect();
    Ok(NaiveBayes { log_prior, log_likelihood })
}

impl NaiveBayes {
    pub fn log_joint(&self, v: &SparseVector) -> Vec<f64> {
        self.log_prior.iter().zip(&self.log_likelihood).map(|(p, ll)| p + v.dot_dense(ll)).collect()
    }

    pub fn proba(&self, v: &SparseVector) -> Vec<f64> {
        softmax(&self.log_joint(v))
    }

    pub(super) fn shape_ok(&self, k: usize, d: usize) -> bool {
        self.log_prior.len() == k && self.log_likelihood.iter().all(|r| r.len() == d) && self.log_likelihood.len() == k
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::testutil::labels;
    use proptest::prelude::*;

    fn dataset(docs: &[(Vec<f64>, usize)], k: usize) -> LabeledDataset {
        LabeledDataset::new(
            docs.iter().map(|(v, _)| SparseVector::from_dense(v)).collect(),
            docs.iter().map(|(_, y)| *y).collect(),
            labels(k),
        )
        .unwrap()
    }

    #[test]
    fn two_class_example() {
        // A: counts (2,0) and (1,1); B: (0,2). Query (1,0).
        let data = dataset(&[(vec![2.0, 0.0], 0), (vec![1.0, 1.0], 0), (vec![0.0, 2.0], 1)], 2);
        let m = train(&data, &NbConfig::default()).unwrap();
        let p = m.proba(&SparseVector::from_dense(&[1.0, 0.0]));
        // θ_A = (4/6, 2/6), θ_B = (1/4, 3/4); prior 2/3 and 1/3.
        let a = 2.0 / 3.0 * 4.0 / 6.0;
        let b = 1.0 / 3.0 * 1.0 / 4.0;
        assert!((p[0] - a / (a + b)).abs() < 1e-12);
        assert!((p[0] - 0.8421).abs() < 1e-4);
    }

    #[test]
    fn raw_count_example() {
        // A = "x x", B = "y"; query "x".
        let data = dataset(&[(vec![2.0, 0.0], 0), (vec![0.0, 1.0], 1)], 2);
        let m = train(&data, &NbConfig::default()).unwrap();
        let p = m.proba(&SparseVector::from_dense(&[1.0, 0.0]));
        assert!((p[0] - 0.6923).abs() < 1e-4);
    }

    #[test]
    fn unseen_features_give_uniform_posterior() {
        let data = dataset(&[(vec![1.0, 0.0, 0.0], 0), (vec![0.0, 1.0, 0.0], 1)], 2);
        let m = train(&data, &NbConfig::default()).unwrap();
        let p = m.proba(&SparseVector::from_dense(&[0.0, 0.0, 1.0]));
        assert!((p[0] - 0.5).abs() < 1e-12 && (p[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn negative_features_rejected() {
        let data = dataset(&[(vec![-1.0, 0.0], 0), (vec![1.0, 0.0], 1)], 2);
        assert!(train(&data, &NbConfig::default()).is_err());
    }

    proptest! {
        // Posterior computed as a plain product of probabilities.
        #[test]
        fn matches_brute_force_bayes(
            k in 1usize..=3,
            raw in prop::collection::vec((prop::collection::vec(0u8..4, 4), 0usize..3), 1..=6),
            query in prop::collection::vec(0u8..3, 4),
        ) {
            let mut docs: Vec<(Vec<f64>, usize)> = raw
                .iter()
                .map(|(c, y)| (c.iter().map(|&x| x as f64).collect(), y % k))
                .collect();
            for (label, doc) in docs.iter_mut().enumerate().take(k) {
                doc.1 = label;
            }
            prop_assume!(docs.len() >= k);
            let data = dataset(&docs, k);
            let m = train(&data, &NbConfig::default()).unwrap();
            let q: Vec<f64> = query.iter().map(|&x| x as f64).collect();
            let got = m.proba(&SparseVector::from_dense(&q));

            let mut joint = vec![0.0; k];
            for (c, j) in joint.iter_mut().enumerate() {
                let members: Vec<&Vec<f64>> = docs.iter().filter(|d| d.1 == c).map(|d| &d.0).collect();
                let mut p = members.len() as f64 / docs.len() as f64;
                let total: f64 = members.iter().flat_map(|v| v.iter()).sum();
                for f in 0..4 {
                    let n_f: f64 = members.iter().map(|v| v[f]).sum();
                    let theta = (n_f + 1.0) / (total + 4.0);
                    p *= theta.powf(q[f]);
                }
                *j = p;
            }
            let z: f64 = joint.iter().sum();
            for c in 0..k {
                prop_assert!((got[c] - joint[c] / z).abs() <= 1e-9);
            }
        }
    }
}
