//! `simulate` and `attack-impact`: run the charging plant under an attack
//! and reduce the result to CSV artifacts.

use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, ValueEnum};
use evcs_sim::{
    extract_edges, impact_report, io, run_simulation, AttackScenario, SimConfig, SocTrace,
    ThresholdPair, TransitionEdge,
};
use serde::Serialize;

use crate::manifest;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AttackKind {
    None,
    Ddos,
    Fdi,
}

#[derive(Args, Serialize)]
pub struct SimulateArgs {
    /// Attack to run against the plant
    #[arg(long, value_enum, default_value_t = AttackKind::None)]
    pub attack: AttackKind,
    /// Command-path delay in seconds (ddos only)
    #[arg(long, default_value_t = 0.0)]
    pub delay: f64,
    /// Injected low threshold in percent SOC (fdi only)
    #[arg(long, default_value_t = 35.0)]
    pub low: f64,
    /// Injected high threshold in percent SOC (fdi only)
    #[arg(long, default_value_t = 80.0)]
    pub high: f64,
    /// Recorded for replay; the plant itself is deterministic
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Output directory
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

impl SimulateArgs {
    fn scenario(&self) -> anyhow::Result<AttackScenario> {
        Ok(match self.attack {
            AttackKind::None => AttackScenario::None,
            AttackKind::Ddos => AttackScenario::Ddos { delay_s: self.delay },
            AttackKind::Fdi => {
                AttackScenario::Fdi { thresholds: ThresholdPair::new(self.low, self.high)? }
            }
        })
    }
}

fn impact_csv(report: &evcs_sim::ImpactReport) -> anyhow::Result<String> {
    let mut buf = Vec::new();
    io::write_impact_csv(report, &mut buf)?;
    Ok(String::from_utf8(buf).expect("impact csv is ascii"))
}

fn violations_csv(report: &evcs_sim::ImpactReport) -> anyhow::Result<String> {
    let mut buf = Vec::new();
    io::write_violations_csv(report, &mut buf)?;
    Ok(String::from_utf8(buf).expect("violations csv is ascii"))
}

/// Run one scenario against the attack-free reference and write
/// trace/edges/impact/violations CSVs.
pub fn simulate(args: &SimulateArgs) -> anyhow::Result<()> {
    manifest::ensure_dir(&args.out)?;
    let cfg = SimConfig { seed: args.seed, ..SimConfig::default() };
    let attack = args.scenario()?;

    let reference = run_simulation(&cfg, &AttackScenario::None)?;
    let attacked = run_simulation(&cfg, &attack)?;
    let report = impact_report(&reference, &attacked, cfg.thresholds, cfg.window())?;

    manifest::write_text(&args.out, "trace.csv", &io::trace_csv_string(&attacked.0))?;
    manifest::write_text(&args.out, "edges.csv", &io::edges_csv_string(&attacked.1))?;
    manifest::write_text(&args.out, "impact.csv", &impact_csv(&report)?)?;
    manifest::write_text(&args.out, "violations.csv", &violations_csv(&report)?)?;
    manifest::write(
        &args.out,
        "simulate",
        args,
        &["trace.csv", "edges.csv", "impact.csv", "violations.csv"],
    )?;

    println!(
        "simulate: {} samples, {} in-window reversals, {} threshold violations, starved={}",
        attacked.0.len(),
        attacked.1.len(),
        report.threshold_violations.len(),
        report.starved
    );
    Ok(())
}

#[derive(Args, Serialize)]
pub struct AttackImpactArgs {
    /// Recorded for replay; the sweeps themselves are deterministic
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Output directory
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

const SWEEP_DELAYS: [f64; 5] = [60.0, 120.0, 180.0, 240.0, 300.0];
const SWEEP_BANDS: [(f64, f64); 4] = [(35.0, 80.0), (10.0, 90.0), (5.0, 95.0), (0.0, 100.0)];

fn full_run(
    cfg: &SimConfig,
    attack: &AttackScenario,
) -> anyhow::Result<(SocTrace, Vec<TransitionEdge>)> {
    let (trace, _) = run_simulation(cfg, attack)?;
    let edges = extract_edges(&trace, (0.0, cfg.duration));
    Ok((trace, edges))
}

/// Sweep the canonical delay values and threshold bands, writing one summary
/// CSV per attack family plus a time-vs-SOC trace per scenario.
pub fn attack_impact(args: &AttackImpactArgs) -> anyhow::Result<()> {
    manifest::ensure_dir(&args.out)?;
    let cfg = SimConfig { seed: args.seed, ..SimConfig::default() };
    let reference = full_run(&cfg, &AttackScenario::None)?;
    let mut outputs = vec!["trace_none.csv".to_string()];
    manifest::write_text(&args.out, "trace_none.csv", &io::trace_csv_string(&reference.0))?;

    let mut ddos = String::from("delay_s,first_edge_time,first_edge_soc,overshoot,edge_delay_pct,starved\n");
    for delay in SWEEP_DELAYS {
        let attacked = full_run(&cfg, &AttackScenario::Ddos { delay_s: delay })?;
        let report = impact_report(&reference, &attacked, cfg.thresholds, cfg.window())?;
        let first = attacked.1.first().context("delayed run produced no reversals")?;
        let overshoot = first.soc - reference.1.first().context("reference has no reversals")?.soc;
        ddos.push_str(&format!(
            "{},{},{},{},{},{}\n",
            delay,
            first.time,
            first.soc,
            overshoot,
            report.edge_delay_pct.first().copied().unwrap_or(0.0),
            report.starved
        ));
        let name = format!("trace_ddos_{delay:.0}s.csv");
        manifest::write_text(&args.out, &name, &io::trace_csv_string(&attacked.0))?;
        outputs.push(name);
    }
    manifest::write_text(&args.out, "ddos_sweep.csv", &ddos)?;
    outputs.push("ddos_sweep.csv".to_string());

    let mut fdi = String::from("low,high,min_soc,max_soc,swing,violations\n");
    for (low, high) in SWEEP_BANDS {
        let attack = AttackScenario::Fdi { thresholds: ThresholdPair::new(low, high)? };
        let attacked = full_run(&cfg, &attack)?;
        let report = impact_report(&reference, &attacked, cfg.thresholds, cfg.window())?;
        let min = attacked.0.samples.iter().map(|s| s.soc).fold(f64::INFINITY, f64::min);
        let max = attacked.0.samples.iter().map(|s| s.soc).fold(f64::NEG_INFINITY, f64::max);
        fdi.push_str(&format!(
            "{},{},{},{},{},{}\n",
            low,
            high,
            min,
            max,
            max - min,
            report.threshold_violations.len()
        ));
        let name = format!("trace_fdi_{low:.0}_{high:.0}.csv");
        manifest::write_text(&args.out, &name, &io::trace_csv_string(&attacked.0))?;
        outputs.push(name);
    }
    manifest::write_text(&args.out, "fdi_sweep.csv", &fdi)?;
    outputs.push("fdi_sweep.csv".to_string());

    let refs: Vec<&str> = outputs.iter().map(String::as_str).collect();
    manifest::write(&args.out, "attack-impact", args, &refs)?;
    println!(
        "attack-impact: {} delay scenarios, {} threshold bands",
        SWEEP_DELAYS.len(),
        SWEEP_BANDS.len()
    );
    Ok(())
}
