//! `evcs` — one binary tying the pipeline together: simulate attacks on the
//! charging plant, generate and featurize corpora, train and score
//! detectors, and replay alert scenarios through the detection mesh.
//!
//! Exit codes: 0 on success, 1 on a domain error (bad config, unreadable or
//! degenerate data), 2 on a usage error (unknown flag or subcommand). Every
//! subcommand writes a `manifest.json` under `--out` recording the full
//! option set and seeds, so any run can be replayed bit-for-bit. No command
//! mutates its inputs.

use clap::{Parser, Subcommand};

mod cmd_corpus;
mod cmd_cv;
mod cmd_mesh;
mod cmd_model;
mod cmd_sim;
mod manifest;
mod store;
mod tabular;

#[derive(Parser)]
#[command(name = "evcs", version, about = "Attack simulation and ransomware detection pipeline for an EV charging plant", max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one plant scenario and write trace, edge, and impact CSVs
    Simulate(cmd_sim::SimulateArgs),
    /// Sweep the canonical delay and threshold-injection attacks into plot-ready CSVs
    AttackImpact(cmd_sim::AttackImpactArgs),
    /// Generate a labeled synthetic opcode-frequency corpus plus its layout
    GenData(cmd_corpus::GenDataArgs),
    /// Convert one instruction-trace text file into a labeled feature row
    Featurize(cmd_corpus::FeaturizeArgs),
    /// Train one detector on a stratified 40/30/30 split and save the bundle
    Train(cmd_model::TrainArgs),
    /// Score a saved model bundle against a labeled corpus
    Evaluate(cmd_model::EvaluateArgs),
    /// Stratified k-fold cross-validation of one architecture
    Cv(cmd_cv::CvArgs),
    /// Replay a timed injection scenario through the detection mesh
    Mesh(cmd_mesh::MeshArgs),
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Simulate(args) => cmd_sim::simulate(&args),
        Command::AttackImpact(args) => cmd_sim::attack_impact(&args),
        Command::GenData(args) => cmd_corpus::gen_data(&args),
        Command::Featurize(args) => cmd_corpus::featurize_file(&args),
        Command::Train(args) => cmd_model::train(&args),
        Command::Evaluate(args) => cmd_model::evaluate(&args),
        Command::Cv(args) => cmd_cv::cv(&args),
        Command::Mesh(args) => cmd_mesh::mesh(&args),
    }
}

fn main() {
    // Usage errors exit 2 from clap's own parser; everything the pipeline
    // itself rejects surfaces here as a domain error.
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
