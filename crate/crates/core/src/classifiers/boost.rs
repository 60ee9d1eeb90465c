use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::{Columns, DecisionTree, Grower, MaxFeatures, TreeConfig};
use super::{argmax, LabeledDataset};
use crate::error::{Error, Result};
use crate::features::SparseVector;

/// Weighted error used in place of an exact zero, which caps α.
pub const ERROR_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct AdaBoostConfig {
    pub stages: usize,
}

impl Default for AdaBoostConfig {
    fn default() -> Self {
        AdaBoostConfig { stages: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub tree: DecisionTree,
    pub alpha: f64,
}

/// SAMME over depth-1 stumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoost {
    pub stages: Vec<Stage>,
}

/// SAMME stage weight `ln((1 - err) / err) + ln(K - 1)`.
pub fn samme_alpha(err: f64, n_labels: usize) -> f64 {
    let e = err.max(ERROR_FLOOR);
    ((1.0 - e) / e).ln() + ((n_labels - 1) as f64).ln()
}

pub(super) fn train(data: &LabeledDataset, cfg: &AdaBoostConfig) -> Result<AdaBoost> {
    if cfg.stages == 0 {
        return Err(Error::Config("boosting needs at least one stage".into()));
    }
    let k = data.n_labels();
    let stump = TreeConfig { max_depth: Some(1), min_samples_split: 2, max_features: MaxFeatures::All };
    let columns = Columns::new(data.vectors(), data.dim());
    let grower = Grower { vectors: data.vectors(), labels: data.labels(), n_labels: k, columns: &columns, cfg: &stump };
    // Stumps consider every feature, so the generator is never drawn from.
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let n = data.len();
    let mut w = vec![1.0 / n as f64; n];
    let mut stages = Vec::new();
    for _ in 0..cfg.stages {
        let tree = grower.grow(&w, &mut rng);
        let miss: Vec<bool> =
            data.vectors().iter().zip(data.labels()).map(|(x, &y)| argmax(tree.proba(x)) != y).collect();
        let total: f64 = w.iter().sum();
        let err = w.iter().zip(&miss).filter(|(_, &m)| m).map(|(wi, _)| wi).sum::<f64>() / total;
        if err >= 1.0 - 1.0 / k as f64 {
            break;
        }
        let alpha = samme_alpha(err, k);
        stages.push(Stage { tree, alpha });
        if err <= 0.0 {
            break;
        }
        let boost = alpha.exp();
        for (wi, &m) in w.iter_mut().zip(&miss) {
            if m {
                *wi *= boost;
            }
        }
        let z: f64 = w.iter().sum();
        w.iter_mut().for_each(|wi| *wi /= z);
    }
    if stages.is_empty() {
        return Err(Error::Train("first boosting stage is no better than chance".into()));
    }
    Ok(AdaBoost { stages })
}

impl AdaBoost {
    /// α-weighted stump votes, normalized to sum to one.
    pub fn proba(&self, v: &SparseVector, n_labels: usize) -> Vec<f64> {
        let mut votes = vec![0.0; n_labels];
        for s in &self.stages {
            votes[argmax(s.tree.proba(v))] += s.alpha;
        }
        let z: f64 = votes.iter().sum();
        votes.iter_mut().for_each(|x| *x /= z);
        votes
    }
}
