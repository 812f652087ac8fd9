//! Reduced-order simulation of a SCADA-supervised battery energy storage (BES)
//! unit inside an EV charging station, together with the attack models used to
//! study how a compromised supervisory link degrades charge control.
//!
//! The plant is a linear state-of-charge (SOC) integrator. A remote controller
//! watches the SOC during a fixed control window and issues charge/discharge
//! reversals at a two-threshold hysteresis band. Attacks tamper with the
//! command path (delayed delivery) or with the thresholds themselves
//! (false-data injection); [`attack::impact_report`] quantifies the damage by
//! pairing control reversals between a reference run and an attacked run.

pub mod attack;
pub mod io;
pub mod plant;

pub use attack::{
    apply_fdi, impact_report, AttackScenario, DelayChannel, ImpactReport, ThresholdViolation,
    WhichThreshold,
};
pub use plant::{
    controller_decide, extract_edges, plant_step, run_simulation, Mode, Sample, SimConfig,
    SocTrace, ThresholdPair, TransitionEdge,
};

use thiserror::Error;

/// Errors shared by the plant and attack layers.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid thresholds: low {low} must be below high {high}, both within [0, 100]")]
    InvalidThresholds { low: f64, high: f64 },
    #[error("command delay {0} s outside the supported [0, 300] s range")]
    InvalidDelay(f64),
    #[error("unknown attack type {0:?} (expected \"none\", \"ddos\" or \"fdi\")")]
    UnknownAttackType(String),
    #[error("attack scenario is missing field {0:?}")]
    MissingScenarioField(&'static str),
    #[error("traces sampled on different time grids cannot be compared")]
    TimeGridMismatch,
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed scenario document: {0}")]
    ScenarioFormat(#[from] serde_json::Error),
}
