use serde::{Deserialize, Serialize};

use super::LabeledDataset;
use crate::error::{Error, Result};
use crate::features::SparseVector;

#[derive(Debug, Clone, PartialEq)]
pub struct KnnConfig {
    pub k: usize,
}

impl Default for KnnConfig {
    fn default() -> Self {
        KnnConfig { k: 5 }
    }
}

/// Brute-force cosine k-nearest-neighbours over the stored training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    pub k: usize,
    pub vectors: Vec<SparseVector>,
    pub labels: Vec<usize>,
}

pub(super) fn train(data: &LabeledDataset, cfg: &KnnConfig) -> Result<Knn> {
    if cfg.k == 0 {
        return Err(Error::Config("k must be positive".into()));
    }
    Ok(Knn { k: cfg.k, vectors: data.vectors().to_vec(), labels: data.labels().to_vec() })
}

impl Knn {
    /// Training indices of the nearest neighbours, most similar first;
    /// equal similarities keep the lower training index.
    pub fn neighbors(&self, v: &SparseVector) -> Vec<usize> {
        let mut sims: Vec<(f64, usize)> = self.vectors.iter().enumerate().map(|(i, x)| (x.cosine(v), i)).collect();
        let k = self.k.min(sims.len());
        let by_rank = |a: &(f64, usize), b: &(f64, usize)| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1));
        if k < sims.len() {
            sims.select_nth_unstable_by(k, by_rank);
            sims.truncate(k);
        }
        sims.sort_by(by_rank);
        sims.into_iter().map(|(_, i)| i).collect()
    }

    /// Vote fractions among the neighbours.
    pub fn proba(&self, v: &SparseVector, n_labels: usize) -> Vec<f64> {
        let nn = self.neighbors(v);
        let mut votes = vec![0.0; n_labels];
        for &i in &nn {
            votes[self.labels[i]] += 1.0;
        }
        let total = nn.len() as f64;
        votes.iter_mut().for_each(|x| *x /= total);
        votes
    }

    pub(super) fn shape_ok(&self, k: usize, d: usize) -> bool {
        self.k > 0
            && !self.vectors.is_empty()
            && self.vectors.len() == self.labels.len()
            && self.labels.iter().all(|&l| l < k)
            && self.vectors.iter().all(|v| v.dim() == d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::testutil::labels;
    use proptest::prelude::*;

    fn model(rows: &[(&[f64], usize)], k: usize) -> Knn {
        Knn {
            k,
            vectors: rows.iter().map(|(v, _)| SparseVector::from_dense(v)).collect(),
            labels: rows.iter().map(|(_, y)| *y).collect(),
        }
    }

    #[test]
    fn kth_rank_ties_prefer_lower_index() {
        let m = model(&[(&[1.0, 0.0], 1), (&[1.0, 0.0], 0), (&[1.0, 0.0], 1)], 2);
        assert_eq!(m.neighbors(&SparseVector::from_dense(&[2.0, 0.0])), vec![0, 1]);
    }

    #[test]
    fn vote_fractions() {
        let m = model(&[(&[1.0, 0.0], 0), (&[0.9, 0.1], 1), (&[0.8, 0.2], 1), (&[0.0, 1.0], 0)], 3);
        let p = m.proba(&SparseVector::from_dense(&[1.0, 0.0]), 2);
        assert!((p[0] - 1.0 / 3.0).abs() < 1e-12 && (p[1] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn k_larger_than_training_set() {
        let m = model(&[(&[1.0], 0), (&[2.0], 1)], 5);
        assert_eq!(m.proba(&SparseVector::from_dense(&[1.0]), 2), vec![0.5, 0.5]);
    }

    proptest! {
        #[test]
        fn one_nn_reproduces_training_labels(
            rows in prop::collection::btree_set(prop::collection::vec(0u8..4, 3), 2..12),
        ) {
            // Distinct directions: drop zero vectors and scalar multiples.
            let mut vecs: Vec<Vec<f64>> = Vec::new();
            for r in rows {
                let v: Vec<f64> = r.iter().map(|&x| x as f64).collect();
                let sv = SparseVector::from_dense(&v);
                if sv.is_zero() || vecs.iter().any(|u| (SparseVector::from_dense(u).cosine(&sv) - 1.0).abs() < 1e-12) {
                    continue;
                }
                vecs.push(v);
            }
            prop_assume!(vecs.len() >= 2);
            let ys: Vec<usize> = (0..vecs.len()).map(|i| i % 2).collect();
            let data = LabeledDataset::new(vecs.iter().map(|v| SparseVector::from_dense(v)).collect(), ys.clone(), labels(2)).unwrap();
            let m = train(&data, &KnnConfig { k: 1 }).unwrap();
            for (x, &y) in data.vectors().iter().zip(&ys) {
                let p = m.proba(x, 2);
                prop_assert_eq!(p[y], 1.0);
            }
        }
    }
}
