//! Nine sentence classifiers behind one train/predict contract.
//!
//! Every model keeps the sorted label list it was trained with. Wherever a
//! prediction is an argmax or a plurality, exact ties go to the
//! lexicographically smallest label, which is also the lowest label index.

mod boost;
mod forest;
mod ftstyle;
mod knn;
pub mod linear;
mod nb;
mod tree;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::features::{FeatureSpace, SparseVector};

pub use boost::{samme_alpha, AdaBoost, AdaBoostConfig};
pub use forest::{Forest, ForestConfig};
pub use ftstyle::{FtConfig, FtStyle};
pub use knn::{Knn, KnnConfig};
pub use linear::{HingeConfig, LinearModel, LogRegConfig, SgdConfig};
pub use nb::{NaiveBayes, NbConfig};
pub use tree::{DecisionTree, MaxFeatures, Node, TreeConfig};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Nb,
    LogReg,
    Svm,
    Sgd,
    Knn,
    DTree,
    RForest,
    AdaBoost,
    FtStyle,
}

impl ModelKind {
    pub const ALL: [ModelKind; 9] = [
        ModelKind::Nb,
        ModelKind::LogReg,
        ModelKind::Svm,
        ModelKind::Sgd,
        ModelKind::Knn,
        ModelKind::DTree,
        ModelKind::RForest,
        ModelKind::AdaBoost,
        ModelKind::FtStyle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Nb => "nb",
            ModelKind::LogReg => "logreg",
            ModelKind::Svm => "svm",
            ModelKind::Sgd => "sgd",
            ModelKind::Knn => "knn",
            ModelKind::DTree => "dtree",
            ModelKind::RForest => "rforest",
            ModelKind::AdaBoost => "adaboost",
            ModelKind::FtStyle => "ftstyle",
        }
    }

    /// Hinge-trained kinds produce margins, not probabilities.
    pub fn supports_probability(self) -> bool {
        !matches!(self, ModelKind::Svm | ModelKind::Sgd)
    }

    fn needs_two_labels(self) -> bool {
        self != ModelKind::Nb
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    /// Accepts the canonical names and the short command-line aliases.
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "nb" => ModelKind::Nb,
            "lr" | "logreg" => ModelKind::LogReg,
            "svm" => ModelKind::Svm,
            "sgd" => ModelKind::Sgd,
            "knn" => ModelKind::Knn,
            "dt" | "dtree" => ModelKind::DTree,
            "rf" | "rforest" => ModelKind::RForest,
            "ada" | "adaboost" => ModelKind::AdaBoost,
            "ftstyle" => ModelKind::FtStyle,
            other => return Err(Error::Config(format!("unknown classifier `{other}`"))),
        })
    }
}

/// Feature vectors with label indices into a shared sorted label list.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    vectors: Vec<SparseVector>,
    labels: Vec<usize>,
    label_list: Vec<String>,
}

impl LabeledDataset {
    /// Every label in `label_list` must occur at least once.
    pub fn new(vectors: Vec<SparseVector>, labels: Vec<usize>, label_list: Vec<String>) -> Result<Self> {
        if vectors.len() != labels.len() {
            return Err(Error::Validation(format!("{} vectors but {} labels", vectors.len(), labels.len())));
        }
        if label_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation("label list must be sorted and duplicate-free".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= label_list.len()) {
            return Err(Error::Validation(format!("label index {bad} out of range")));
        }
        let mut seen = vec![false; label_list.len()];
        for &l in &labels {
            seen[l] = true;
        }
        if let Some(unused) = seen.iter().position(|s| !s) {
            return Err(Error::Validation(format!("label `{}` has no examples", label_list[unused])));
        }
        if let Some(first) = vectors.first() {
            if let Some(v) = vectors.iter().find(|v| v.dim() != first.dim()) {
                return Err(Error::Validation(format!("mixed feature dimensions {} and {}", first.dim(), v.dim())));
            }
        }
        Ok(LabeledDataset { vectors, labels, label_list })
    }

    pub fn from_corpus(corpus: &Corpus, features: &FeatureSpace) -> Result<Self> {
        let label_list = corpus.label_set().to_vec();
        let labels = corpus
            .labels()
            .map(|l| label_list.binary_search_by(|x| x.as_str().cmp(l)).expect("label in set"))
            .collect();
        let vectors = corpus.texts().map(|t| features.transform(t)).collect();
        LabeledDataset::new(vectors, labels, label_list)
    }

    pub fn vectors(&self) -> &[SparseVector] {
        &self.vectors
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label_list(&self) -> &[String] {
        &self.label_list
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn n_labels(&self) -> usize {
        self.label_list.len()
    }

    pub fn dim(&self) -> usize {
        self.vectors.first().map_or(0, SparseVector::dim)
    }
}

/// Hyperparameters for every kind plus the master seed.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub seed: u64,
    pub nb: NbConfig,
    pub logreg: LogRegConfig,
    pub svm: HingeConfig,
    pub sgd: SgdConfig,
    pub knn: KnnConfig,
    pub tree: TreeConfig,
    pub forest: ForestConfig,
    pub adaboost: AdaBoostConfig,
    pub ftstyle: FtConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig::with_seed(42)
    }
}

impl TrainConfig {
    pub fn with_seed(seed: u64) -> Self {
        TrainConfig {
            seed,
            nb: NbConfig::default(),
            logreg: LogRegConfig::default(),
            svm: HingeConfig::default(),
            sgd: SgdConfig::default(),
            knn: KnnConfig::default(),
            tree: TreeConfig::default(),
            forest: ForestConfig::default(),
            adaboost: AdaBoostConfig::default(),
            ftstyle: FtConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Params {
    Nb(NaiveBayes),
    Linear(LinearModel),
    Knn(Knn),
    Tree(DecisionTree),
    Forest(Forest),
    Boost(AdaBoost),
    Ft(FtStyle),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    kind: ModelKind,
    label_list: Vec<String>,
    feature_dim: usize,
    params: Params,
}

pub fn train(kind: ModelKind, data: &LabeledDataset, cfg: &TrainConfig) -> Result<TrainedModel> {
    if data.is_empty() {
        return Err(Error::Train("empty training set".into()));
    }
    if kind.needs_two_labels() && data.n_labels() < 2 {
        return Err(Error::Train(format!("{kind} needs at least two labels")));
    }
    let params = match kind {
        ModelKind::Nb => Params::Nb(nb::train(data, &cfg.nb)?),
        ModelKind::LogReg => Params::Linear(linear::train_logreg(data, &cfg.logreg, cfg.seed)?),
        ModelKind::Svm => Params::Linear(linear::train_svm(data, &cfg.svm, cfg.seed)?),
        ModelKind::Sgd => Params::Linear(linear::train_sgd(data, &cfg.sgd, cfg.seed)?),
        ModelKind::Knn => Params::Knn(knn::train(data, &cfg.knn)?),
        ModelKind::DTree => Params::Tree(tree::train(data, &cfg.tree, cfg.seed)?),
        ModelKind::RForest => Params::Forest(forest::train(data, &cfg.forest, cfg.seed)?),
        ModelKind::AdaBoost => Params::Boost(boost::train(data, &cfg.adaboost)?),
        ModelKind::FtStyle => Params::Ft(ftstyle::train(data, &cfg.ftstyle, cfg.seed)?),
    };
    Ok(TrainedModel { kind, label_list: data.label_list().to_vec(), feature_dim: data.dim(), params })
}

/// Independent per-unit seed (one-vs-rest label, forest tree) derived from
/// the master seed, so parallel units never share a random stream.
pub(crate) fn derive_seed(seed: u64, unit: u64) -> u64 {
    seed ^ (unit + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Index of the largest value; exact ties go to the lower index.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn label_list(&self) -> &[String] {
        &self.label_list
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn supports_probability(&self) -> bool {
        self.kind.supports_probability()
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.label_list.binary_search_by(|l| l.as_str().cmp(label)).ok()
    }

    fn check_dim(&self, v: &SparseVector) -> Result<()> {
        if v.dim() != self.feature_dim {
            return Err(Error::Validation(format!(
                "vector has dimension {}, model expects {}",
                v.dim(),
                self.feature_dim
            )));
        }
        Ok(())
    }

    /// Probabilities in label-list order.
    pub fn proba_vec(&self, v: &SparseVector) -> Result<Vec<f64>> {
        self.check_dim(v)?;
        let k = self.label_list.len();
        Ok(match &self.params {
            Params::Nb(m) => m.proba(v),
            Params::Linear(m) if self.kind == ModelKind::LogReg => softmax(&m.scores(v)),
            Params::Linear(_) => {
                return Err(Error::Capability(format!(
                    "{} is a margin classifier without probability estimates",
                    self.kind
                )))
            }
            Params::Knn(m) => m.proba(v, k),
            Params::Tree(m) => m.proba(v).to_vec(),
            Params::Forest(m) => m.proba(v, k),
            Params::Boost(m) => m.proba(v, k),
            Params::Ft(m) => m.proba(v),
        })
    }

    pub fn predict_proba(&self, v: &SparseVector) -> Result<BTreeMap<String, f64>> {
        let probs = self.proba_vec(v)?;
        Ok(self.label_list.iter().cloned().zip(probs).collect())
    }

    /// Raw one-vs-rest (or softmax-input) scores of the linear kinds.
    pub fn decision_vec(&self, v: &SparseVector) -> Result<Vec<f64>> {
        self.check_dim(v)?;
        match &self.params {
            Params::Linear(m) => Ok(m.scores(v)),
            _ => Err(Error::Capability(format!("{} has no linear decision scores", self.kind))),
        }
    }

    pub fn decision_scores(&self, v: &SparseVector) -> Result<BTreeMap<String, f64>> {
        let scores = self.decision_vec(v)?;
        Ok(self.label_list.iter().cloned().zip(scores).collect())
    }

    pub fn predict_index(&self, v: &SparseVector) -> Result<usize> {
        let scores = if let Params::Forest(f) = &self.params {
            self.check_dim(v)?;
            f.votes(v, self.label_list.len())
        } else if self.supports_probability() {
            self.proba_vec(v)?
        } else {
            self.decision_vec(v)?
        };
        Ok(argmax(&scores))
    }

    pub fn predict(&self, v: &SparseVector) -> Result<&str> {
        let i = self.predict_index(v)?;
        Ok(&self.label_list[i])
    }

    /// Versioned JSON envelope `{format_version, kind, label_list,
    /// feature_dim, params}`.
    pub fn to_json(&self) -> Result<String> {
        let envelope = Envelope {
            format_version: MODEL_FORMAT_VERSION,
            kind: self.kind,
            label_list: self.label_list.clone(),
            feature_dim: self.feature_dim,
            params: serde_json::to_value(&self.params)?,
        };
        Ok(serde_json::to_string(&envelope)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let env: Envelope = serde_json::from_str(s)?;
        if env.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Validation(format!("unsupported model format version {}", env.format_version)));
        }
        let params = match env.kind {
            ModelKind::Nb => Params::Nb(serde_json::from_value(env.params)?),
            ModelKind::LogReg | ModelKind::Svm | ModelKind::Sgd => Params::Linear(serde_json::from_value(env.params)?),
            ModelKind::Knn => Params::Knn(serde_json::from_value(env.params)?),
            ModelKind::DTree => Params::Tree(serde_json::from_value(env.params)?),
            ModelKind::RForest => Params::Forest(serde_json::from_value(env.params)?),
            ModelKind::AdaBoost => Params::Boost(serde_json::from_value(env.params)?),
            ModelKind::FtStyle => Params::Ft(serde_json::from_value(env.params)?),
        };
        let model = TrainedModel { kind: env.kind, label_list: env.label_list, feature_dim: env.feature_dim, params };
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        let k = self.label_list.len();
        if k == 0 || self.label_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation("label list must be non-empty, sorted and unique".into()));
        }
        let ok = match &self.params {
            Params::Nb(m) => m.shape_ok(k, self.feature_dim),
            Params::Linear(m) => m.shape_ok(k, self.feature_dim),
            Params::Knn(m) => m.shape_ok(k, self.feature_dim),
            Params::Tree(m) => m.shape_ok(k),
            Params::Forest(m) => m.trees.iter().all(|t| t.shape_ok(k)),
            Params::Boost(m) => m.stages.iter().all(|s| s.tree.shape_ok(k)),
            Params::Ft(m) => m.shape_ok(k, self.feature_dim),
        };
        if !ok {
            return Err(Error::Validation(format!(
                "{} parameters do not match {k} labels and dimension {}",
                self.kind, self.feature_dim
            )));
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        TrainedModel::from_json(&fs::read_to_string(path)?)
    }
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    format_version: u32,
    kind: ModelKind,
    label_list: Vec<String>,
    feature_dim: usize,
    params: Value,
}
