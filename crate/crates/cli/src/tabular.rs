//! Shared plumbing for the data-facing subcommands: layout and corpus
//! loading, row-matrix construction, and the architecture flag.

use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::ValueEnum;
use evcs_features::{csvio, Dataset, FeatureLayout, Label};
use evcs_nn::ModelSpec;
use ndarray::Array2;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Arch {
    Dnn,
    Cnn,
    Lstm,
}

impl Arch {
    pub fn spec(self) -> ModelSpec {
        match self {
            Arch::Dnn => ModelSpec::dnn(),
            Arch::Cnn => ModelSpec::cnn1d(),
            Arch::Lstm => ModelSpec::lstm(),
        }
    }
}

/// Load a layout manifest, or the built-in default when no path is given.
pub fn load_layout(path: Option<&Path>) -> anyhow::Result<FeatureLayout> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading layout {}", p.display()))?;
            Ok(FeatureLayout::parse(&text)?)
        }
        None => Ok(FeatureLayout::default_layout().clone()),
    }
}

pub fn load_corpus(data: &PathBuf, layout: &FeatureLayout) -> anyhow::Result<Dataset> {
    csvio::read_csv(data, layout).with_context(|| format!("reading corpus {}", data.display()))
}

/// Stack the rows of a dataset into an (n, width) matrix.
pub fn matrix_of(data: &Dataset) -> Array2<f64> {
    let width = data.rows.first().map_or(0, |r| r.values.len());
    let mut x = Array2::zeros((data.len(), width));
    for (i, row) in data.rows.iter().enumerate() {
        for (j, &v) in row.values.iter().enumerate() {
            x[[i, j]] = v;
        }
    }
    x
}

pub fn labels_at(data: &Dataset, indices: &[usize]) -> Vec<Label> {
    indices.iter().map(|&i| data.rows[i].label).collect()
}
