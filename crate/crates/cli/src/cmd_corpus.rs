//! `gen-data` and `featurize`: produce labeled opcode-frequency rows, either
//! synthetically or from a real instruction trace.

use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, ValueEnum};
use evcs_features::{csvio, featurize, parse_trace, Dataset, FeatureVector, Label, SynthParams};
use serde::Serialize;

use crate::manifest;
use crate::tabular::load_layout;

#[derive(Args, Serialize)]
pub struct GenDataArgs {
    /// Number of ransomware traces
    #[arg(long, default_value_t = 561)]
    pub ransomware: usize,
    /// Number of normal traces
    #[arg(long, default_value_t = 447)]
    pub normal: usize,
    /// Class separation in [0, 1]; higher is easier to classify
    #[arg(long, default_value_t = 0.9)]
    pub separation: f64,
    /// Corpus generator seed
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Output directory
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

/// Generate a synthetic labeled corpus and write `corpus.csv` plus the
/// feature layout it was extracted against.
pub fn gen_data(args: &GenDataArgs) -> anyhow::Result<()> {
    manifest::ensure_dir(&args.out)?;
    let params = SynthParams {
        n_ransomware: args.ransomware,
        n_normal: args.normal,
        separation: args.separation,
        seed: args.seed,
        ..SynthParams::default()
    };
    let layout = evcs_features::FeatureLayout::default_layout();
    let data = evcs_features::synth_corpus(&params, layout)?;

    manifest::write_text(&args.out, "corpus.csv", &csvio::dataset_to_csv(&data))?;
    manifest::write_text(&args.out, "layout.txt", &layout.to_manifest())?;
    manifest::write(&args.out, "gen-data", args, &["corpus.csv", "layout.txt"])?;

    let (ransomware, normal) = data.class_counts();
    println!("gen-data: {} rows ({ransomware} ransomware, {normal} normal)", data.len());
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelArg {
    Ransomware,
    Normal,
}

impl LabelArg {
    fn label(self) -> Label {
        match self {
            LabelArg::Ransomware => Label::Ransomware,
            LabelArg::Normal => Label::Normal,
        }
    }
}

#[derive(Args, Serialize)]
pub struct FeaturizeArgs {
    /// Instruction-trace text file (one mnemonic per line)
    #[arg(long)]
    pub data: PathBuf,
    /// Feature layout manifest; defaults to the built-in layout
    #[arg(long)]
    pub layout: Option<PathBuf>,
    /// Label recorded with the extracted row
    #[arg(long, value_enum, default_value_t = LabelArg::Ransomware)]
    pub label: LabelArg,
    /// Output directory
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

/// Parse one trace file and write its feature row as a one-row corpus CSV.
pub fn featurize_file(args: &FeaturizeArgs) -> anyhow::Result<()> {
    manifest::ensure_dir(&args.out)?;
    let layout = load_layout(args.layout.as_deref())?;
    let text = std::fs::read_to_string(&args.data)
        .with_context(|| format!("reading trace {}", args.data.display()))?;
    let trace = parse_trace(&text);
    if trace.is_empty() {
        anyhow::bail!("trace {} contains no recognizable instructions", args.data.display());
    }
    let values = featurize(&trace, &layout);
    let row = FeatureVector { values, label: args.label.label() };
    let data = Dataset { rows: vec![row], layout };

    manifest::write_text(&args.out, "features.csv", &csvio::dataset_to_csv(&data))?;
    manifest::write(&args.out, "featurize", args, &["features.csv"])?;

    println!(
        "featurize: {} instructions ({} lines skipped)",
        trace.len(),
        trace.skipped_lines
    );
    Ok(())
}
