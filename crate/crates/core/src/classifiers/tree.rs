//! CART with Gini impurity over weighted sparse samples.
//!
//! Columns are pre-sorted once; every node sweeps the in-node part of each
//! candidate column, with the implicit zeros folded in as one group.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::LabeledDataset;
use crate::error::{Error, Result};
use crate::features::SparseVector;

/// How many non-constant features a split search evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaxFeatures {
    All,
    /// √ of the features active at the node, rounded up.
    Sqrt,
    Count(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeConfig {
    /// `None` grows until purity.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub max_features: MaxFeatures,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig { max_depth: Some(50), min_samples_split: 2, max_features: MaxFeatures::All }
    }
}

impl TreeConfig {
    fn validate(&self) -> Result<()> {
        if self.max_depth == Some(0) || self.min_samples_split < 2 || self.max_features == MaxFeatures::Count(0) {
            return Err(Error::Config(
                "tree depth and feature count must be positive, min_samples_split at least 2".into(),
            ));
        }
        Ok(())
    }
}

/// Flat tree node. Leaves have `feature == None` and a label distribution;
/// internal nodes send `value <= threshold` to `left`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub feature: Option<u32>,
    pub threshold: f64,
    pub left: u32,
    pub right: u32,
    pub distribution: Vec<f64>,
}

impl Node {
    fn placeholder() -> Self {
        Node { feature: None, threshold: 0.0, left: 0, right: 0, distribution: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn leaf(&self, v: &SparseVector) -> &Node {
        let mut node = &self.nodes[0];
        while let Some(f) = node.feature {
            let next = if v.get(f) <= node.threshold { node.left } else { node.right };
            node = &self.nodes[next as usize];
        }
        node
    }

    pub fn proba(&self, v: &SparseVector) -> &[f64] {
        &self.leaf(v).distribution
    }

    pub fn depth(&self) -> usize {
        fn walk(t: &DecisionTree, i: usize) -> usize {
            let n = &t.nodes[i];
            match n.feature {
                None => 0,
                Some(_) => 1 + walk(t, n.left as usize).max(walk(t, n.right as usize)),
            }
        }
        walk(self, 0)
    }

    /// Children always follow their parent, which rules out cycles.
    pub(super) fn shape_ok(&self, k: usize) -> bool {
        !self.nodes.is_empty()
            && self.nodes.iter().enumerate().all(|(i, n)| match n.feature {
                None => n.distribution.len() == k,
                Some(_) => {
                    let (l, r) = (n.left as usize, n.right as usize);
                    l > i && r > i && l < self.nodes.len() && r < self.nodes.len()
                }
            })
    }
}

/// Column-major copy of the training vectors, each column sorted by value.
pub(crate) struct Columns {
    cols: Vec<Vec<(u32, f64)>>,
}

impl Columns {
    pub fn new(vectors: &[SparseVector], dim: usize) -> Self {
        let mut cols: Vec<Vec<(u32, f64)>> = vec![Vec::new(); dim];
        for (s, v) in vectors.iter().enumerate() {
            for &(f, w) in v.entries() {
                cols[f as usize].push((s as u32, w));
            }
        }
        for c in &mut cols {
            c.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        }
        Columns { cols }
    }
}

pub(crate) struct Grower<'a> {
    pub vectors: &'a [SparseVector],
    pub labels: &'a [usize],
    pub n_labels: usize,
    pub columns: &'a Columns,
    pub cfg: &'a TreeConfig,
}

struct Split {
    feature: u32,
    threshold: f64,
    proxy: f64,
}

struct Scratch {
    in_node: Vec<bool>,
    feat_stamp: Vec<u32>,
    stamp: u32,
}

impl Grower<'_> {
    /// Grows one tree on samples with positive weight.
    pub fn grow(&self, weights: &[f64], rng: &mut ChaCha8Rng) -> DecisionTree {
        let mut scratch = Scratch {
            in_node: vec![false; self.vectors.len()],
            feat_stamp: vec![0; self.columns.cols.len()],
            stamp: 0,
        };
        let root: Vec<u32> = (0..self.vectors.len() as u32).filter(|&s| weights[s as usize] > 0.0).collect();
        let mut nodes = vec![Node::placeholder()];
        let mut stack = vec![(0usize, root, 0usize)];
        while let Some((id, samples, depth)) = stack.pop() {
            let mut tot = vec![0.0; self.n_labels];
            for &s in &samples {
                tot[self.labels[s as usize]] += weights[s as usize];
            }
            let total: f64 = tot.iter().sum();
            let pure = tot.iter().filter(|&&w| w > 0.0).count() <= 1;
            let stop =
                pure || samples.len() < self.cfg.min_samples_split || self.cfg.max_depth.is_some_and(|d| depth >= d);
            let split = if stop { None } else { self.best_split(&samples, weights, &tot, total, &mut scratch, rng) };
            match split {
                None => {
                    nodes[id].distribution = tot.iter().map(|w| w / total).collect();
                }
                Some(sp) => {
                    let (left, right): (Vec<u32>, Vec<u32>) =
                        samples.iter().partition(|&&s| self.vectors[s as usize].get(sp.feature) <= sp.threshold);
                    let l = nodes.len();
                    nodes.push(Node::placeholder());
                    nodes.push(Node::placeholder());
                    nodes[id].feature = Some(sp.feature);
                    nodes[id].threshold = sp.threshold;
                    nodes[id].left = l as u32;
                    nodes[id].right = l as u32 + 1;
                    stack.push((l + 1, right, depth + 1));
                    stack.push((l, left, depth + 1));
                }
            }
        }
        DecisionTree { nodes }
    }

    fn best_split(
        &self,
        samples: &[u32],
        weights: &[f64],
        tot: &[f64],
        total: f64,
        scratch: &mut Scratch,
        rng: &mut ChaCha8Rng,
    ) -> Option<Split> {
        scratch.stamp += 1;
        let mut active = Vec::new();
        for &s in samples {
            scratch.in_node[s as usize] = true;
            for &(f, _) in self.vectors[s as usize].entries() {
                if scratch.feat_stamp[f as usize] != scratch.stamp {
                    scratch.feat_stamp[f as usize] = scratch.stamp;
                    active.push(f);
                }
            }
        }
        active.sort_unstable();
        let budget = match self.cfg.max_features {
            MaxFeatures::All => active.len(),
            MaxFeatures::Sqrt => (active.len() as f64).sqrt().ceil() as usize,
            MaxFeatures::Count(m) => m,
        };
        if budget < active.len() {
            active.shuffle(rng);
        }

        let tol = 1e-12 * total.max(1.0);
        let mut best: Option<Split> = None;
        let mut evaluated = 0;
        for &f in &active {
            if evaluated == budget {
                break;
            }
            let Some(cand) = self.sweep(f, samples.len(), weights, tot, total, &scratch.in_node) else {
                continue;
            };
            evaluated += 1;
            let better = match &best {
                None => true,
                Some(b) => cand.proxy > b.proxy + tol || ((cand.proxy - b.proxy).abs() <= tol && f < b.feature),
            };
            if better {
                best = Some(cand);
            }
        }
        for &s in samples {
            scratch.in_node[s as usize] = false;
        }
        best
    }

    /// Best threshold on one feature, scored by `Σ_c L_c²/W_L + Σ_c R_c²/W_R`
    /// (maximizing it minimizes weighted child Gini). `None` if the feature
    /// is constant at this node.
    fn sweep(&self, f: u32, n: usize, weights: &[f64], tot: &[f64], total: f64, in_node: &[bool]) -> Option<Split> {
        let entries: Vec<(f64, usize, f64)> = self.columns.cols[f as usize]
            .iter()
            .filter(|(s, _)| in_node[*s as usize])
            .map(|&(s, v)| (v, self.labels[s as usize], weights[s as usize]))
            .collect();
        let n_zero = n - entries.len();
        let mut zero_group = tot.to_vec();
        for &(_, c, w) in &entries {
            zero_group[c] -= w;
        }
        let negatives = entries.partition_point(|e| e.0 < 0.0);
        let items = entries.len() + usize::from(n_zero > 0);

        let mut left = vec![0.0; self.n_labels];
        let mut wl = 0.0;
        let mut prev: Option<f64> = None;
        let mut best: Option<Split> = None;
        for i in 0..items {
            let zero_item = n_zero > 0 && i == negatives;
            let entry = if n_zero > 0 && i > negatives { i - 1 } else { i };
            let value = if zero_item { 0.0 } else { entries[entry].0 };
            if let Some(p) = prev {
                if value > p {
                    let wr = total - wl;
                    let proxy = left.iter().map(|l| l * l).sum::<f64>() / wl
                        + tot.iter().zip(&left).map(|(t, l)| (t - l) * (t - l)).sum::<f64>() / wr;
                    if best.as_ref().is_none_or(|b| proxy > b.proxy) {
                        best = Some(Split { feature: f, threshold: p + (value - p) / 2.0, proxy });
                    }
                }
            }
            if zero_item {
                for (l, z) in left.iter_mut().zip(&zero_group) {
                    *l += z;
                }
                wl += zero_group.iter().sum::<f64>();
            } else {
                let (_, c, w) = entries[entry];
                left[c] += w;
                wl += w;
            }
            prev = Some(value);
        }
        best
    }
}

pub(super) fn train(data: &LabeledDataset, cfg: &TreeConfig, seed: u64) -> Result<DecisionTree> {
    cfg.validate()?;
    let columns = Columns::new(data.vectors(), data.dim());
    let grower =
        Grower { vectors: data.vectors(), labels: data.labels(), n_labels: data.n_labels(), columns: &columns, cfg };
    let weights = vec![1.0; data.len()];
    Ok(grower.grow(&weights, &mut ChaCha8Rng::seed_from_u64(seed)))
}

pub(super) fn validate_config(cfg: &TreeConfig) -> Result<()> {
    cfg.validate()
}
