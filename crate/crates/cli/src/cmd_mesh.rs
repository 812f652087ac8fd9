//! `mesh`: replay a timed injection scenario through the four-layer
//! detection mesh using a trained bundle, and write the event transcript.

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use evcs_mesh::{parse_scenario, run_mesh_sim, transcript_to_csv, BusConfig, Mesh, MeshConfig};
use serde::Serialize;

use crate::manifest;
use crate::store::load_bundle;
use crate::tabular::{load_corpus, load_layout, matrix_of};

/// Scenario used when no file is given: one row-0 sample reaches the
/// supervisory node at tick 0.
const DEFAULT_SCENARIO: &str = "0,scada,row:0\n";

#[derive(Args, Serialize)]
pub struct MeshArgs {
    /// Directory holding model.bin + model.json from a train run
    #[arg(long)]
    pub model_dir: PathBuf,
    /// Labeled corpus CSV providing the rows scenarios reference
    #[arg(long)]
    pub data: PathBuf,
    /// Feature layout manifest; defaults to the built-in layout
    #[arg(long)]
    pub layout: Option<PathBuf>,
    /// Scenario script of `tick,node,row:IDX` lines; defaults to one row-0
    /// injection at the supervisory node at tick 0
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Ransomware-likelihood threshold at which a node raises an alert
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    /// Per-send drop probability on the alert bus
    #[arg(long, default_value_t = 0.0)]
    pub drop: f64,
    /// Retransmissions per destination after the first attempt
    #[arg(long, default_value_t = 3)]
    pub retries: u32,
    /// Bus seed; transcripts replay bit-exactly from it
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output directory
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

/// Run the scenario and write transcript.csv plus the final per-node states.
pub fn mesh(args: &MeshArgs) -> anyhow::Result<()> {
    manifest::ensure_dir(&args.out)?;
    let (model, meta) = load_bundle(&args.model_dir)?;
    let layout = load_layout(args.layout.as_deref())?;
    let mut data = load_corpus(&args.data, &layout)?;
    meta.scaler.apply_dataset(&mut data);
    let x = matrix_of(&data);

    let scenario_text = match &args.scenario {
        Some(path) => std::fs::read_to_string(path)
            .with_context(|| format!("reading scenario {}", path.display()))?,
        None => DEFAULT_SCENARIO.to_string(),
    };
    let injections = parse_scenario(&scenario_text)?;

    let config = MeshConfig { threshold: args.threshold, ..MeshConfig::default() };
    let mut net = Mesh::new(model, &config)?;
    let bus = BusConfig {
        drop_probability: args.drop,
        max_retries: args.retries,
        seed: args.seed,
        ..BusConfig::default()
    };
    let transcript = run_mesh_sim(&mut net, &injections, x.view(), &bus)?;

    let mut states_csv = String::from("node,mitigation\n");
    for (node, mitigation) in &transcript.final_states {
        let _ = writeln!(states_csv, "{node},{}", mitigation.name());
    }
    manifest::write_text(&args.out, "transcript.csv", &transcript_to_csv(&transcript))?;
    manifest::write_text(&args.out, "final_states.csv", &states_csv)?;
    manifest::write(&args.out, "mesh", args, &["transcript.csv", "final_states.csv"])?;

    println!(
        "mesh: {} injections, {} events, final states: {}",
        injections.len(),
        transcript.events.len(),
        transcript
            .final_states
            .iter()
            .map(|(n, m)| format!("{n}={}", m.name()))
            .collect::<Vec<_>>()
            .join(" ")
    );
    Ok(())
}
