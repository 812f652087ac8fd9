//! Model evaluation: stratified data splits, binary detection metrics with
//! ransomware as the positive class, rank-based AUC, and k-fold
//! cross-validation that trains one model per fold in parallel.
//!
//! Scores follow the training convention: a model outputs the probability
//! of the *normal* class, so a low score means ransomware-like. Metric
//! helpers that need the opposite orientation say so explicitly.

mod cv;
mod folds;
mod metrics;
mod render;

pub use cv::{cross_validate, subset_split, CvReport, CvSummary, FoldReport, MetricStats};
pub use folds::{split_40_30_30, stratified_folds};
pub use metrics::{confusion_at, metrics, roc_auc, Confusion, MetricSet};
pub use render::{folds_to_csv, render_table, report_to_json};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("scores and labels differ in length ({scores} vs {labels})")]
    LengthMismatch { scores: usize, labels: usize },
    #[error("cannot evaluate an empty score list")]
    EmptyInput,
    #[error("score at position {0} is not finite")]
    NonFiniteScore(usize),
    #[error("AUC needs both classes present")]
    SingleClass,
    #[error("class {label} has {count} members, fewer than {k} folds")]
    ClassTooSmall { label: i64, count: usize, k: usize },
    #[error("fold count {0} is invalid; need at least 2")]
    BadFoldCount(usize),
    #[error("need at least {need} rows for a three-way split, got {got}")]
    TooFewRows { got: usize, need: usize },
    #[error("row index {0} is out of bounds")]
    IndexOutOfBounds(usize),
    #[error(transparent)]
    Train(#[from] evcs_nn::NnError),
}
