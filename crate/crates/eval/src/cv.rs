//! k-fold cross-validation: train one model per held-out fold (folds run
//! in parallel, each fully seeded) and aggregate the metric suite.

use crate::{confusion_at, metrics, roc_auc, stratified_folds, Confusion, EvalError};
use evcs_features::{Dataset, Label};
use evcs_nn::{derive_seed, predict, train, DataSplit, ModelSpec, TrainConfig};
use ndarray::{Array1, Array2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Seed stream for per-fold training, kept clear of the streams the
/// training loop itself derives from its config seed.
const FOLD_SEED_STREAM: u64 = 11;

/// Detection threshold used when a fold's scores are turned into counts.
pub(crate) const SCORE_THRESHOLD: f64 = 0.5;

/// Held-out metrics for one fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold_index: usize,
    pub confusion: Confusion,
    pub acc: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub far: f64,
    pub auc: f64,
    pub degenerate: Vec<String>,
}

impl FoldReport {
    pub fn new(fold_index: usize, confusion: Confusion, auc: f64) -> Self {
        let m = metrics(&confusion);
        Self {
            fold_index,
            confusion,
            acc: m.acc,
            precision: m.precision,
            recall: m.recall,
            f1: m.f1,
            far: m.far,
            auc,
            degenerate: m.degenerate,
        }
    }
}

/// Mean and population standard deviation of one metric across folds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricStats {
    pub mean: f64,
    pub std: f64,
}

impl MetricStats {
    fn over(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Self { mean, std: var.sqrt() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvSummary {
    pub acc: MetricStats,
    pub auc: MetricStats,
    pub precision: MetricStats,
    pub recall: MetricStats,
    pub f1: MetricStats,
    pub far: MetricStats,
}

impl CvSummary {
    pub fn from_folds(folds: &[FoldReport]) -> Self {
        let pull = |f: fn(&FoldReport) -> f64| -> MetricStats {
            MetricStats::over(&folds.iter().map(f).collect::<Vec<_>>())
        };
        Self {
            acc: pull(|f| f.acc),
            auc: pull(|f| f.auc),
            precision: pull(|f| f.precision),
            recall: pull(|f| f.recall),
            f1: pull(|f| f.f1),
            far: pull(|f| f.far),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub folds: Vec<FoldReport>,
    pub summary: CvSummary,
    /// Per-fold training wall time, seconds. Timing, not part of the
    /// deterministic payload.
    pub wall_times_s: Vec<f64>,
}

/// Materialize the given rows of a dataset as a training split, with the
/// labels encoded as normal-class probabilities.
pub fn subset_split(data: &Dataset, indices: &[usize]) -> Result<DataSplit, EvalError> {
    if let Some(&bad) = indices.iter().find(|&&i| i >= data.len()) {
        return Err(EvalError::IndexOutOfBounds(bad));
    }
    let width = data.rows.first().map_or(0, |r| r.values.len());
    let mut x = Array2::zeros((indices.len(), width));
    let mut y = Array1::zeros(indices.len());
    for (row, &i) in indices.iter().enumerate() {
        for (col, &v) in data.rows[i].values.iter().enumerate() {
            x[(row, col)] = v;
        }
        y[row] = data.rows[i].label.as_f64();
    }
    Ok(DataSplit::new(x, y)?)
}

/// Train and score one model per fold: each fold trains on the other k−1
/// folds with a seed derived from (cfg.seed, fold index) and reports
/// held-out metrics. The whole report is a pure function of
/// (dataset, spec, cfg, k).
pub fn cross_validate(
    spec: &ModelSpec,
    data: &Dataset,
    k: usize,
    cfg: &TrainConfig,
) -> Result<CvReport, EvalError> {
    let labels = data.labels();
    let folds = stratified_folds(&labels, k, cfg.seed)?;

    let per_fold: Result<Vec<(FoldReport, f64)>, EvalError> = folds
        .par_iter()
        .enumerate()
        .map(|(i, held)| {
            let train_idx: Vec<usize> = folds
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .flat_map(|(_, f)| f.iter().copied())
                .collect();
            let train_split = subset_split(data, &train_idx)?;
            let held_split = subset_split(data, held)?;
            let fold_cfg = TrainConfig {
                seed: derive_seed(cfg.seed, FOLD_SEED_STREAM, i as u64),
                ..cfg.clone()
            };
            let (model, history) = train(spec, &train_split, &held_split, &fold_cfg)?;

            let probs = predict(&model, held_split.x.view())?;
            let scores: Vec<f64> = probs.to_vec();
            let held_labels: Vec<Label> = held.iter().map(|&ix| labels[ix]).collect();
            let confusion = confusion_at(&scores, &held_labels, SCORE_THRESHOLD)?;
            let ransomware_scores: Vec<f64> = scores.iter().map(|p| 1.0 - p).collect();
            let auc = roc_auc(&ransomware_scores, &held_labels)?;
            Ok((FoldReport::new(i, confusion, auc), history.wall_time_s))
        })
        .collect();

    let per_fold = per_fold?;
    let (folds, wall_times_s): (Vec<FoldReport>, Vec<f64>) = per_fold.into_iter().unzip();
    let summary = CvSummary::from_folds(&folds);
    Ok(CvReport { folds, summary, wall_times_s })
}
