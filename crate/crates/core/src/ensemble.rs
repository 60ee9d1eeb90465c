//! Hard and soft voting over classifiers that share one feature space.
//!
//! Any member without probability estimates (svm, sgd) forces hard voting
//! under `auto`.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classifiers::TrainedModel;
use crate::error::{Error, Result};
use crate::features::SparseVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VoteMode {
    #[default]
    Auto,
    Hard,
    Soft,
}

impl fmt::Display for VoteMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VoteMode::Auto => "auto",
            VoteMode::Hard => "hard",
            VoteMode::Soft => "soft",
        })
    }
}

impl FromStr for VoteMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(VoteMode::Auto),
            "hard" => Ok(VoteMode::Hard),
            "soft" => Ok(VoteMode::Soft),
            other => Err(Error::Config(format!("unknown voting mode `{other}`"))),
        }
    }
}

/// The voting rule actually applied after `auto` is resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Voting {
    Hard,
    Soft,
}

#[derive(Debug, Clone)]
pub struct EnsembleSpec {
    members: Vec<TrainedModel>,
    mode: VoteMode,
}

impl EnsembleSpec {
    pub fn new(members: Vec<TrainedModel>, mode: VoteMode) -> Result<Self> {
        if members.len() < 2 {
            return Err(Error::Validation("an ensemble needs at least two members".into()));
        }
        let first = &members[0];
        for m in &members[1..] {
            if m.label_list() != first.label_list() {
                return Err(Error::Validation(format!(
                    "member {} has a different label list from {}",
                    m.kind(),
                    first.kind()
                )));
            }
            if m.feature_dim() != first.feature_dim() {
                return Err(Error::Validation(format!(
                    "member {} expects dimension {}, {} expects {}",
                    m.kind(),
                    m.feature_dim(),
                    first.kind(),
                    first.feature_dim()
                )));
            }
        }
        let spec = EnsembleSpec { members, mode };
        spec.resolve_mode()?;
        Ok(spec)
    }

    pub fn members(&self) -> &[TrainedModel] {
        &self.members
    }

    pub fn mode(&self) -> VoteMode {
        self.mode
    }

    pub fn label_list(&self) -> &[String] {
        self.members[0].label_list()
    }

    pub fn resolve_mode(&self) -> Result<Voting> {
        let all_probabilistic = self.members.iter().all(TrainedModel::supports_probability);
        match self.mode {
            VoteMode::Hard => Ok(Voting::Hard),
            VoteMode::Auto if all_probabilistic => Ok(Voting::Soft),
            VoteMode::Auto => Ok(Voting::Hard),
            VoteMode::Soft if all_probabilistic => Ok(Voting::Soft),
            VoteMode::Soft => {
                let kind = self
                    .members
                    .iter()
                    .find(|m| !m.supports_probability())
                    .map(TrainedModel::kind)
                    .expect("some member lacks probabilities");
                Err(Error::Capability(format!("soft voting needs probabilities but {kind} has none")))
            }
        }
    }

    pub fn predict(&self, v: &SparseVector) -> Result<String> {
        match self.resolve_mode()? {
            Voting::Hard => {
                let preds = self.members.iter().map(|m| m.predict(v)).collect::<Result<Vec<_>>>()?;
                vote_hard(&preds)
            }
            Voting::Soft => {
                let dists = self.members.iter().map(|m| m.predict_proba(v)).collect::<Result<Vec<_>>>()?;
                vote_soft(&dists)
            }
        }
    }
}

/// Most frequent label; ties go to the lexicographically smallest.
pub fn vote_hard<S: AsRef<str>>(predictions: &[S]) -> Result<String> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for p in predictions {
        *counts.entry(p.as_ref()).or_default() += 1;
    }
    let mut best: Option<(&str, usize)> = None;
    for (label, n) in counts {
        if best.is_none_or(|(_, b)| n > b) {
            best = Some((label, n));
        }
    }
    best.map(|(l, _)| l.to_string()).ok_or_else(|| Error::Validation("no predictions to vote on".into()))
}

/// Label with the largest summed probability; ties go to the
/// lexicographically smallest.
///
/// Each label's probabilities are added in ascending order of value, so the
/// result does not depend on member order even at the last bit.
pub fn vote_soft(distributions: &[BTreeMap<String, f64>]) -> Result<String> {
    let first = distributions.first().ok_or_else(|| Error::Validation("no distributions to vote on".into()))?;
    for d in distributions {
        if d.len() != first.len() || d.keys().zip(first.keys()).any(|(a, b)| a != b) {
            return Err(Error::Validation("member distributions cover different labels".into()));
        }
        let total: f64 = d.values().sum();
        if (total - 1.0).abs() > 1e-6 {
            return Err(Error::Validation(format!("distribution sums to {total}, not 1")));
        }
    }
    let mut best: Option<(&str, f64)> = None;
    for label in first.keys() {
        let mut probs: Vec<f64> = distributions.iter().map(|d| d[label]).collect();
        probs.sort_by(f64::total_cmp);
        let sum: f64 = probs.iter().sum();
        if best.is_none_or(|(_, b)| sum > b) {
            best = Some((label, sum));
        }
    }
    Ok(best.expect("non-empty label set").0.to_string())
}

/// On-disk ensemble description; member paths are relative to the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleFile {
    pub mode: VoteMode,
    pub member_model_paths: Vec<String>,
}

impl EnsembleFile {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}

/// Reads an ensemble file and loads every member model it names.
pub fn load_ensemble(path: impl AsRef<Path>) -> Result<EnsembleSpec> {
    let path = path.as_ref();
    let file = EnsembleFile::read(path)?;
    let base = path.parent().unwrap_or(Path::new(""));
    let members =
        file.member_model_paths.iter().map(|p| TrainedModel::load(base.join(p))).collect::<Result<Vec<_>>>()?;
    EnsembleSpec::new(members, file.mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::testutil::disjoint;
    use crate::classifiers::{train, ModelKind, TrainConfig};
    use proptest::prelude::*;

    fn dist(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(l, p)| (l.to_string(), *p)).collect()
    }

    fn models(kinds: &[ModelKind]) -> Vec<TrainedModel> {
        let data = disjoint(3, 4);
        let mut cfg = TrainConfig::default();
        cfg.forest.n_trees = 3;
        kinds.iter().map(|&k| train(k, &data, &cfg).unwrap()).collect()
    }

    #[test]
    fn hard_vote_examples() {
        assert_eq!(vote_hard(&["A", "A", "B"]).unwrap(), "A");
        assert_eq!(vote_hard(&["ben", "asm", "ben", "asm", "doi"]).unwrap(), "asm");
        assert_eq!(vote_hard(&["X"; 5]).unwrap(), "X");
        assert!(vote_hard::<&str>(&[]).is_err());
    }

    #[test]
    fn soft_vote_examples() {
        let a = dist(&[("A", 0.6), ("B", 0.4)]);
        let b = dist(&[("A", 0.3), ("B", 0.7)]);
        assert_eq!(vote_soft(std::slice::from_ref(&a)).unwrap(), "A");
        assert_eq!(vote_soft(&[a, b]).unwrap(), "B");
        let m1 = dist(&[("A", 0.25), ("B", 0.75)]);
        let m2 = dist(&[("A", 0.75), ("B", 0.25)]);
        assert_eq!(vote_soft(&[m1, m2]).unwrap(), "A");
    }

    #[test]
    fn soft_vote_rejects_mismatched_labels() {
        let a = dist(&[("A", 0.5), ("B", 0.5)]);
        let c = dist(&[("A", 0.5), ("C", 0.5)]);
        assert!(matches!(vote_soft(&[a.clone(), c]), Err(Error::Validation(_))));
        assert!(vote_soft(&[dist(&[("A", 0.5), ("B", 0.2)])]).is_err());
    }

    #[test]
    fn hard_vote_exhaustive_oracle() {
        let labels = ["a", "b", "c"];
        for code in 0..243usize {
            let mut c = code;
            let preds: Vec<&str> = (0..5)
                .map(|_| {
                    let l = labels[c % 3];
                    c /= 3;
                    l
                })
                .collect();
            let counts: Vec<usize> = labels.iter().map(|l| preds.iter().filter(|p| *p == l).count()).collect();
            let max = *counts.iter().max().unwrap();
            let expect = labels[counts.iter().position(|&n| n == max).unwrap()];
            assert_eq!(vote_hard(&preds).unwrap(), expect);
        }
    }

    #[test]
    fn mode_resolution() {
        use ModelKind::*;
        let five = EnsembleSpec::new(models(&[DTree, Knn, LogReg, Nb, Svm]), VoteMode::Auto).unwrap();
        assert_eq!(five.resolve_mode().unwrap(), Voting::Hard);
        let soft = EnsembleSpec::new(models(&[LogReg, Nb, RForest]), VoteMode::Auto).unwrap();
        assert_eq!(soft.resolve_mode().unwrap(), Voting::Soft);
        assert!(matches!(EnsembleSpec::new(models(&[LogReg, Svm]), VoteMode::Soft), Err(Error::Capability(_))));
        let forced = EnsembleSpec::new(models(&[LogReg, Nb]), VoteMode::Hard).unwrap();
        assert_eq!(forced.resolve_mode().unwrap(), Voting::Hard);
    }

    #[test]
    fn members_must_agree() {
        let a = models(&[ModelKind::Nb]).remove(0);
        let other = train(ModelKind::Nb, &disjoint(2, 3), &TrainConfig::default()).unwrap();
        assert!(EnsembleSpec::new(vec![a.clone()], VoteMode::Auto).is_err());
        assert!(matches!(EnsembleSpec::new(vec![a, other], VoteMode::Auto), Err(Error::Validation(_))));
    }

    #[test]
    fn unanimous_members_decide() {
        use ModelKind::*;
        let data = disjoint(3, 4);
        for mode in [VoteMode::Auto, VoteMode::Hard] {
            let spec = EnsembleSpec::new(models(&[DTree, Knn, LogReg, Nb, Svm]), mode).unwrap();
            for (x, &y) in data.vectors().iter().zip(data.labels()) {
                assert_eq!(spec.predict(x).unwrap(), data.label_list()[y]);
            }
        }
    }

    #[test]
    fn spec_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let ms = models(&[ModelKind::Nb, ModelKind::Knn]);
        for (i, m) in ms.iter().enumerate() {
            m.save(dir.path().join(format!("m{i}.json"))).unwrap();
        }
        let file = EnsembleFile { mode: VoteMode::Soft, member_model_paths: vec!["m0.json".into(), "m1.json".into()] };
        file.write(dir.path().join("ens.json")).unwrap();
        let spec = load_ensemble(dir.path().join("ens.json")).unwrap();
        assert_eq!(spec.members().len(), 2);
        assert_eq!(spec.resolve_mode().unwrap(), Voting::Soft);
    }

    fn distributions() -> impl Strategy<Value = Vec<BTreeMap<String, f64>>> {
        // Dyadic probabilities keep exact ties reachable.
        prop::collection::vec(prop::sample::select(vec![(0u32, 0u32), (1, 1), (2, 0), (0, 2), (1, 2), (4, 0)]), 1..6)
            .prop_map(|parts| {
                parts
                    .into_iter()
                    .map(|(a, b)| {
                        let pa = a as f64 / 4.0;
                        let pb = b as f64 / 4.0;
                        dist(&[("a", pa), ("b", pb), ("c", 1.0 - pa - pb)])
                    })
                    .collect()
            })
    }

    proptest! {
        #[test]
        fn soft_vote_permutation_invariant(ds in distributions(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut shuffled = ds.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(vote_soft(&ds).unwrap(), vote_soft(&shuffled).unwrap());
        }

        #[test]
        fn identical_members_equal_single(ds in distributions(), n in 1usize..5) {
            let copies = vec![ds[0].clone(); n];
            prop_assert_eq!(vote_soft(&copies).unwrap(), vote_soft(&ds[..1]).unwrap());
        }
    }
}
