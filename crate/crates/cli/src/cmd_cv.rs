//! `cv`: stratified k-fold cross-validation of one architecture over a
//! labeled corpus, rendered as JSON, a fixed-width table, and per-fold CSV.

use std::path::PathBuf;

use clap::Args;
use evcs_eval::{cross_validate, folds_to_csv, render_table, report_to_json};
use evcs_features::{fit_scaler, ScalerModel};
use evcs_nn::TrainConfig;
use serde::Serialize;

use crate::manifest;
use crate::tabular::{load_corpus, load_layout, Arch};

#[derive(Args, Serialize)]
pub struct CvArgs {
    /// Labeled corpus CSV
    #[arg(long)]
    pub data: PathBuf,
    /// Feature layout manifest; defaults to the built-in layout
    #[arg(long)]
    pub layout: Option<PathBuf>,
    /// Architecture to cross-validate
    #[arg(long, value_enum)]
    pub model: Arch,
    /// Number of stratified folds
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    /// Optimizer passes per fold
    #[arg(long, default_value_t = 70)]
    pub epochs: usize,
    /// Minibatch rows
    #[arg(long, default_value_t = 100)]
    pub batch: usize,
    /// Master seed for fold assignment and per-fold training
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Worker threads for fold training; defaults to one per core
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Output directory
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

/// Cross-validate and write cv_report.json, table.txt, and folds.csv.
/// Folds run in parallel; the report is ordered by fold index regardless of
/// completion order.
pub fn cv(args: &CvArgs) -> anyhow::Result<()> {
    if let Some(jobs) = args.jobs {
        // Fails only if a global pool already exists, in which case that
        // pool's size wins.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
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
    let mut data = load_corpus(&args.data, &layout)?;
    let scaler = fit_scaler(&data, ScalerModel::MinMax)?;
    scaler.apply_dataset(&mut data);

    let report = cross_validate(&spec, &data, args.folds, &cfg)?;
    let table = render_table(&report);

    manifest::write_text(&args.out, "cv_report.json", &report_to_json(&report))?;
    manifest::write_text(&args.out, "table.txt", &table)?;
    manifest::write_text(&args.out, "folds.csv", &folds_to_csv(&report))?;
    manifest::write(&args.out, "cv", args, &["cv_report.json", "table.txt", "folds.csv"])?;

    print!("{table}");
    Ok(())
}
