//! Siamese same/different probe over paired embeddings and its
//! cross-validation harness.

mod cv;
mod model;
mod optim;
mod train;

pub use cv::{
    assign_folds, check_counts, mean_se, plan_splits, run_cv, run_fold, CVPlan, CVReport, FoldEval, FoldFailure,
    FoldSplit,
};
pub use model::{bce_with_logit, sigmoid, Forward, Layout, Mode, ProbeModel, ProbeShape};
pub use optim::{lr_at, AdamW};
pub use train::{batch_bounds, evaluate, train_probe, EpochRecord, Metrics, PairData, TrainConfig, TrainOutcome};

use crate::embed::EmbedError;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ProbeError {
    #[error("training batch of {0} pairs; batch norm needs at least 2")]
    BatchTooSmall(usize),
    #[error("non-finite loss at epoch {epoch} (batch starting at {batch_start})")]
    NonFiniteLoss { epoch: usize, batch_start: usize },
    #[error("input size mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("count mismatch: {embeddings} embeddings for {pairs} pairs")]
    CountMismatch { embeddings: usize, pairs: usize },
    #[error("pair {pair} has label {label}; labels must be 0 or 1")]
    BadLabel { pair: usize, label: u8 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error(transparent)]
    Embed(#[from] EmbedError),
}
