//! Repeated stratified k-fold cross-validation at the pair level.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::train::{evaluate, train_probe, PairData, TrainConfig};
use super::ProbeError;
use crate::embed::{EmbeddingSet, Standardizer};
use crate::real::Real;
use crate::rng::{derive_seed, stream, Rng};

const VAL_STREAM: u64 = 0x5641_4c53;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CVPlan {
    pub folds: usize,
    pub repeats: usize,
    /// Share of each training part held out for epoch selection.
    pub val_fraction: f64,
}

impl Default for CVPlan {
    fn default() -> Self {
        Self { folds: 10, repeats: 3, val_fraction: 0.1 }
    }
}

impl CVPlan {
    pub fn validate(&self) -> Result<(), ProbeError> {
        if self.folds < 2 {
            return Err(ProbeError::InvalidConfig("folds must be at least 2"));
        }
        if self.repeats == 0 {
            return Err(ProbeError::InvalidConfig("repeats must be positive"));
        }
        if !(0.0..1.0).contains(&self.val_fraction) {
            return Err(ProbeError::InvalidConfig("val_fraction must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// Pair indices of one (repeat, fold) evaluation. `train` and `val`
/// together are the complement of `test`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSplit {
    pub repeat: usize,
    pub fold: usize,
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

impl FoldSplit {
    pub fn init_seed(&self, master: u64) -> u64 {
        derive_seed(master, self.key(), stream::INIT)
    }

    pub fn shuffle_seed(&self, master: u64) -> u64 {
        derive_seed(master, self.key(), stream::SHUFFLE)
    }

    fn key(&self) -> u64 {
        ((self.repeat as u64) << 32) | self.fold as u64
    }
}

fn check_labels(labels: &[u8]) -> Result<(), ProbeError> {
    match labels.iter().position(|&y| y > 1) {
        Some(i) => Err(ProbeError::BadLabel { pair: i, label: labels[i] }),
        None => Ok(()),
    }
}

/// Fold id of every pair for one repeat: each class is shuffled and dealt
/// round-robin, the dealing position carrying on from one class to the
/// next, so both per-class and total fold sizes differ by at most one.
pub fn assign_folds(labels: &[u8], folds: usize, rng: &mut Rng) -> Vec<usize> {
    let mut assign = alloc::vec![0usize; labels.len()];
    let mut pos = 0usize;
    for class in 0..=1u8 {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        rng.shuffle(&mut members);
        for i in members {
            assign[i] = pos % folds;
            pos += 1;
        }
    }
    assign
}

/// Every (repeat, fold) split in evaluation order.
pub fn plan_splits(labels: &[u8], plan: &CVPlan, seed: u64) -> Result<Vec<FoldSplit>, ProbeError> {
    plan.validate()?;
    check_labels(labels)?;
    let mut out = Vec::with_capacity(plan.folds * plan.repeats);
    for repeat in 0..plan.repeats {
        let mut rng = Rng::derived(seed, repeat as u64, stream::CV_SPLIT);
        let assign = assign_folds(labels, plan.folds, &mut rng);
        for fold in 0..plan.folds {
            let test: Vec<usize> = (0..labels.len()).filter(|&i| assign[i] == fold).collect();
            let mut vrng = Rng::derived(seed, ((repeat as u64) << 32) | fold as u64, VAL_STREAM);
            let mut train = Vec::new();
            let mut val = Vec::new();
            for class in 0..=1u8 {
                let mut rest: Vec<usize> =
                    (0..labels.len()).filter(|&i| assign[i] != fold && labels[i] == class).collect();
                vrng.shuffle(&mut rest);
                let n_val = libm::round(plan.val_fraction * rest.len() as f64) as usize;
                val.extend_from_slice(&rest[..n_val]);
                train.extend_from_slice(&rest[n_val..]);
            }
            train.sort_unstable();
            val.sort_unstable();
            out.push(FoldSplit { repeat, fold, train, val, test });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldEval {
    pub repeat: usize,
    pub fold: usize,
    pub accuracy: f64,
    pub cross_entropy: f64,
    pub best_epoch: usize,
    pub epochs_run: usize,
    pub n_train: usize,
    pub n_val: usize,
    pub n_test: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldFailure {
    pub repeat: usize,
    pub fold: usize,
    pub error: String,
}

fn pair_data<T: Real>(set: &EmbeddingSet, labels: &[u8], std: &Standardizer, idx: &[usize]) -> PairData<T> {
    let (z1, z2) = std.transform_pairs::<T>(set, idx);
    PairData { dim: set.dim(), z1, z2, labels: idx.iter().map(|&i| labels[i]).collect() }
}

/// Standardize on the training part, train with early stopping on the
/// validation part, then score the test fold.
pub fn run_fold<T: Real>(
    set: &EmbeddingSet,
    labels: &[u8],
    split: &FoldSplit,
    cfg: &TrainConfig,
) -> Result<FoldEval, ProbeError> {
    let std = Standardizer::fit(set, &split.train)?;
    let train = pair_data::<T>(set, labels, &std, &split.train);
    let val = pair_data::<T>(set, labels, &std, &split.val);
    let out = train_probe(&train, &val, cfg, split.init_seed(cfg.seed), split.shuffle_seed(cfg.seed))?;
    // The test fold is only touched here, after training is finished.
    let test = pair_data::<T>(set, labels, &std, &split.test);
    let m = evaluate(&out.model, &test)?;
    Ok(FoldEval {
        repeat: split.repeat,
        fold: split.fold,
        accuracy: m.accuracy,
        cross_entropy: m.cross_entropy,
        best_epoch: out.best_epoch,
        epochs_run: out.history.len(),
        n_train: train.len(),
        n_val: val.len(),
        n_test: test.len(),
    })
}

/// Mean and standard error (sample standard deviation over `sqrt(n)`).
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, libm::sqrt(ss / (n - 1) as f64) / libm::sqrt(n as f64))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CVReport {
    pub acc_mean: f64,
    pub acc_se: f64,
    pub ce_mean: f64,
    pub ce_se: f64,
    pub per_fold: Vec<FoldEval>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<FoldFailure>,
}

impl CVReport {
    /// Aggregate fold results in the given order; failed folds are listed
    /// and left out of the statistics.
    pub fn aggregate(results: Vec<(usize, usize, Result<FoldEval, ProbeError>)>) -> Self {
        let mut per_fold = Vec::new();
        let mut failures = Vec::new();
        for (repeat, fold, r) in results {
            match r {
                Ok(e) => per_fold.push(e),
                Err(e) => failures.push(FoldFailure { repeat, fold, error: e.to_string() }),
            }
        }
        let acc: Vec<f64> = per_fold.iter().map(|f| f.accuracy).collect();
        let ce: Vec<f64> = per_fold.iter().map(|f| f.cross_entropy).collect();
        let (acc_mean, acc_se) = mean_se(&acc);
        let (ce_mean, ce_se) = mean_se(&ce);
        Self { acc_mean, acc_se, ce_mean, ce_se, per_fold, failures }
    }
}

pub fn check_counts(set: &EmbeddingSet, labels: &[u8]) -> Result<(), ProbeError> {
    if set.n_pairs() != labels.len() {
        return Err(ProbeError::CountMismatch { embeddings: set.count(), pairs: labels.len() });
    }
    Ok(())
}

/// Sequential cross-validation over every split of `plan`.
pub fn run_cv<T: Real>(
    set: &EmbeddingSet,
    labels: &[u8],
    plan: &CVPlan,
    cfg: &TrainConfig,
) -> Result<CVReport, ProbeError> {
    check_counts(set, labels)?;
    cfg.validate()?;
    let splits = plan_splits(labels, plan, cfg.seed)?;
    let results = splits
        .iter()
        .map(|s| (s.repeat, s.fold, run_fold::<T>(set, labels, s, cfg)))
        .collect();
    Ok(CVReport::aggregate(results))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n: usize, ones: usize) -> Vec<u8> {
        let mut v = alloc::vec![0u8; n];
        for y in v.iter_mut().take(ones) {
            *y = 1;
        }
        let mut rng = Rng::new(9);
        rng.shuffle(&mut v);
        v
    }

    #[test]
    fn se_matches_hand_value() {
        let (m, se) = mean_se(&[0.5, 0.7, 0.9]);
        assert!((m - 0.7).abs() < 1e-12);
        assert!((se - 0.2 / libm::sqrt(3.0)).abs() < 1e-12);
    }

    #[test]
    fn splits_partition_and_stratify() {
        let y = labels(103, 40);
        let plan = CVPlan::default();
        let splits = plan_splits(&y, &plan, 5).unwrap();
        assert_eq!(splits.len(), 30);
        for r in 0..3 {
            let mut seen = alloc::vec![0usize; y.len()];
            let mut pos = Vec::new();
            for s in splits.iter().filter(|s| s.repeat == r) {
                for &i in &s.test {
                    seen[i] += 1;
                }
                pos.push(s.test.iter().filter(|&&i| y[i] == 1).count());
                let mut all: Vec<usize> = s.train.iter().chain(&s.val).chain(&s.test).copied().collect();
                all.sort_unstable();
                assert_eq!(all, (0..y.len()).collect::<Vec<_>>());
            }
            assert!(seen.iter().all(|&c| c == 1));
            assert!(pos.iter().max().unwrap() - pos.iter().min().unwrap() <= 1);
        }
    }

    #[test]
    fn repeats_use_fresh_permutations() {
        let y = labels(60, 30);
        let s = plan_splits(&y, &CVPlan::default(), 1).unwrap();
        assert_ne!(s[0].test, s[10].test);
    }

    #[test]
    fn non_binary_labels_rejected() {
        assert!(matches!(
            plan_splits(&[0, 1, 2], &CVPlan::default(), 0),
            Err(ProbeError::BadLabel { pair: 2, label: 2 })
        ));
    }
}
