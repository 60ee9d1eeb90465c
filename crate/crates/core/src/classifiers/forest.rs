use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{validate_config, Columns, DecisionTree, Grower, MaxFeatures, TreeConfig};
use super::{argmax, derive_seed, LabeledDataset};
use crate::error::{Error, Result};
use crate::features::SparseVector;

#[derive(Debug, Clone, PartialEq)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub bootstrap: bool,
    pub tree: TreeConfig,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            bootstrap: true,
            tree: TreeConfig { max_features: MaxFeatures::Sqrt, ..TreeConfig::default() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<DecisionTree>,
    pub seeds: Vec<u64>,
}

pub(super) fn train(data: &LabeledDataset, cfg: &ForestConfig, seed: u64) -> Result<Forest> {
    validate_config(&cfg.tree)?;
    if cfg.n_trees == 0 {
        return Err(Error::Config("a forest needs at least one tree".into()));
    }
    let columns = Columns::new(data.vectors(), data.dim());
    let grower = Grower {
        vectors: data.vectors(),
        labels: data.labels(),
        n_labels: data.n_labels(),
        columns: &columns,
        cfg: &cfg.tree,
    };
    let seeds: Vec<u64> = (0..cfg.n_trees as u64).map(|i| derive_seed(seed, i)).collect();
    let n = data.len();
    let trees = seeds
        .par_iter()
        .map(|&s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let mut weights = vec![0.0; n];
            if cfg.bootstrap {
                for _ in 0..n {
                    weights[rng.random_range(0..n)] += 1.0;
                }
            } else {
                weights.fill(1.0);
            }
            grower.grow(&weights, &mut rng)
        })
        .collect();
    Ok(Forest { trees, seeds })
}

impl Forest {
    /// Mean of the tree leaf distributions.
    pub fn proba(&self, v: &SparseVector, n_labels: usize) -> Vec<f64> {
        let mut acc = vec![0.0; n_labels];
        for t in &self.trees {
            for (a, p) in acc.iter_mut().zip(t.proba(v)) {
                *a += p;
            }
        }
        let n = self.trees.len() as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        acc
    }

    /// How many trees predict each label; a tree predicts its leaf's
    /// majority label, ties to the lower index.
    pub fn votes(&self, v: &SparseVector, n_labels: usize) -> Vec<f64> {
        let mut votes = vec![0.0; n_labels];
        for t in &self.trees {
            votes[argmax(t.proba(v))] += 1.0;
        }
        votes
    }
}
