//! Model bundles on disk: `model.bin` holds the tensors, `model.json` holds
//! everything needed to use them — the architecture, the scaler fitted on
//! the training rows, the training configuration, and the final curve point.

use std::fs;
use std::path::Path;

use anyhow::Context;
use evcs_features::ScalerParams;
use evcs_nn::{load_model, save_model, EpochStats, Model, ModelSpec, TrainConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RowCounts {
    pub total: usize,
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

/// Sidecar metadata written next to the weights.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BundleMeta {
    pub arch: String,
    pub spec: ModelSpec,
    pub scaler: ScalerParams,
    pub train: TrainConfig,
    pub rows: RowCounts,
    pub param_count: usize,
    pub final_epoch: EpochStats,
    /// Informational only; never used downstream.
    pub wall_time_s: f64,
}

pub fn save_bundle(dir: &Path, model: &Model, meta: &BundleMeta) -> anyhow::Result<()> {
    save_model(model, &dir.join("model.bin")).context("writing model.bin")?;
    let text = serde_json::to_string_pretty(meta).context("serializing model metadata")?;
    fs::write(dir.join("model.json"), text + "\n").context("writing model.json")?;
    Ok(())
}

pub fn load_bundle(dir: &Path) -> anyhow::Result<(Model, BundleMeta)> {
    let model = load_model(&dir.join("model.bin"))
        .with_context(|| format!("reading {}", dir.join("model.bin").display()))?;
    let text = fs::read_to_string(dir.join("model.json"))
        .with_context(|| format!("reading {}", dir.join("model.json").display()))?;
    let meta: BundleMeta = serde_json::from_str(&text).context("parsing model.json")?;
    if meta.spec != *model.spec() {
        anyhow::bail!("model.json does not describe the weights in model.bin");
    }
    Ok((model, meta))
}
