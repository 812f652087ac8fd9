//! `train` and `evaluate`: fit one architecture on a stratified 40/30/30
//! split of a labeled corpus, persist the bundle, and score bundles against
//! held-out data.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use evcs_eval::{confusion_at, metrics, roc_auc, split_40_30_30, subset_split, Confusion, MetricSet};
use evcs_features::{fit_scaler, Dataset, Label, ScalerModel};
use evcs_nn::{predict, train as fit, TrainConfig, TrainHistory};
use serde::Serialize;

use crate::manifest;
use crate::store::{save_bundle, load_bundle, BundleMeta, RowCounts};
use crate::tabular::{labels_at, load_corpus, load_layout, matrix_of, Arch};

/// Classification threshold on the normal-class score; a row below it is
/// called ransomware.
const SCORE_THRESHOLD: f64 = 0.5;

#[derive(Args, Serialize)]
pub struct TrainArgs {
    /// Labeled corpus CSV
    #[arg(long)]
    pub data: PathBuf,
    /// Feature layout manifest; defaults to the built-in layout
    #[arg(long)]
    pub layout: Option<PathBuf>,
    /// Architecture to train
    #[arg(long, value_enum)]
    pub model: Arch,
    /// Optimizer passes over the training split
    #[arg(long, default_value_t = 70)]
    pub epochs: usize,
    /// Minibatch rows
    #[arg(long, default_value_t = 100)]
    pub batch: usize,
    /// Master seed for the split, shuffling, init, and dropout
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Output directory
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct ScoreReport {
    rows: usize,
    confusion: Confusion,
    metrics: MetricSet,
    auc: f64,
}

fn score_report(scores: &[f64], labels: &[Label]) -> anyhow::Result<ScoreReport> {
    let confusion = confusion_at(scores, labels, SCORE_THRESHOLD)?;
    let ransomware_likelihood: Vec<f64> = scores.iter().map(|s| 1.0 - s).collect();
    let auc = roc_auc(&ransomware_likelihood, labels)?;
    Ok(ScoreReport { rows: labels.len(), confusion, metrics: metrics(&confusion), auc })
}

fn history_csv(history: &TrainHistory) -> String {
    let mut text = String::from("epoch,train_loss,train_acc,val_loss,val_acc\n");
    for (i, e) in history.epochs.iter().enumerate() {
        let _ = writeln!(
            text,
            "{},{},{},{},{}",
            i + 1,
            e.train_loss,
            e.train_acc,
            e.val_loss,
            e.val_acc
        );
    }
    text
}

/// Train on 40% of the corpus, monitor on 30%, report on the final 30%, and
/// save the model bundle. The scaler is fitted on the training rows only.
pub fn train(args: &TrainArgs) -> anyhow::Result<()> {
    manifest::ensure_dir(&args.out)?;
    let spec = args.model.spec();
    let cfg = TrainConfig {
        batch_size: args.batch,
        epochs: args.epochs,
        seed: args.seed,
        ..TrainConfig::for_spec(&spec)
    };
    cfg.validate()?;

    let layout = load_layout(args.layout.as_deref())?;
    let data = load_corpus(&args.data, &layout)?;
    let labels = data.labels();
    let (train_idx, val_idx, test_idx) = split_40_30_30(&labels, args.seed)?;

    let train_rows = Dataset {
        rows: train_idx.iter().map(|&i| data.rows[i].clone()).collect(),
        layout: data.layout.clone(),
    };
    let scaler = fit_scaler(&train_rows, ScalerModel::MinMax)?;
    let mut scaled = data.clone();
    scaler.apply_dataset(&mut scaled);

    let train_split = subset_split(&scaled, &train_idx)?;
    let val_split = subset_split(&scaled, &val_idx)?;
    let test_split = subset_split(&scaled, &test_idx)?;

    let (model, history) = fit(&spec, &train_split, &val_split, &cfg)?;

    let scores = predict(&model, test_split.x.view())?;
    let report = score_report(scores.as_slice().expect("contiguous"), &labels_at(&scaled, &test_idx))?;

    let final_epoch = *history.epochs.last().expect("at least one epoch");
    let meta = BundleMeta {
        arch: spec.arch_name().to_string(),
        spec: spec.clone(),
        scaler,
        train: cfg,
        rows: RowCounts {
            total: data.len(),
            train: train_idx.len(),
            val: val_idx.len(),
            test: test_idx.len(),
        },
        param_count: model.param_count(),
        final_epoch,
        wall_time_s: history.wall_time_s,
    };
    save_bundle(&args.out, &model, &meta)?;
    manifest::write_text(&args.out, "history.csv", &history_csv(&history))?;
    manifest::write_text(
        &args.out,
        "test_report.json",
        &(serde_json::to_string_pretty(&report)? + "\n"),
    )?;
    manifest::write(
        &args.out,
        "train",
        args,
        &["model.bin", "model.json", "history.csv", "test_report.json"],
    )?;

    println!(
        "train: {} epochs in {:.1}s, val acc {:.4}, test acc {:.4}, test auc {:.4}",
        history.epochs.len(),
        history.wall_time_s,
        final_epoch.val_acc,
        report.metrics.acc,
        report.auc
    );
    Ok(())
}

#[derive(Args, Serialize)]
pub struct EvaluateArgs {
    /// Labeled corpus CSV to score
    #[arg(long)]
    pub data: PathBuf,
    /// Feature layout manifest; defaults to the built-in layout
    #[arg(long)]
    pub layout: Option<PathBuf>,
    /// Directory holding model.bin + model.json from a train run
    #[arg(long)]
    pub model_dir: PathBuf,
    /// Output directory
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

/// Score a saved bundle against a labeled corpus using the scaler it was
/// trained with.
pub fn evaluate(args: &EvaluateArgs) -> anyhow::Result<()> {
    manifest::ensure_dir(&args.out)?;
    let (model, meta) = load_bundle(&args.model_dir)?;
    let layout = load_layout(args.layout.as_deref())?;
    let mut data = load_corpus(&args.data, &layout)?;
    meta.scaler.apply_dataset(&mut data);

    let x = matrix_of(&data);
    let scores = predict(&model, x.view())?;
    let labels = data.labels();
    let report = score_report(scores.as_slice().expect("contiguous"), &labels)?;

    let mut scores_csv = String::from("row,score,label\n");
    for (i, (s, l)) in scores.iter().zip(&labels).enumerate() {
        let _ = writeln!(scores_csv, "{i},{s},{}", l.as_int());
    }
    manifest::write_text(&args.out, "scores.csv", &scores_csv)?;
    manifest::write_text(
        &args.out,
        "eval_report.json",
        &(serde_json::to_string_pretty(&report)? + "\n"),
    )?;
    manifest::write(&args.out, "evaluate", args, &["scores.csv", "eval_report.json"])?;

    println!(
        "evaluate: {} rows with {}, acc {:.4}, far {:.4}, auc {:.4}",
        labels.len(),
        meta.arch,
        report.metrics.acc,
        report.metrics.far,
        report.auc
    );
    Ok(())
}
