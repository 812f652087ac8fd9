//! Attack models against the supervisory command path.
//!
//! Two families are modelled. A ransomware-driven denial of service keeps the
//! plant and controller honest but stalls every command inside a FIFO channel
//! for a fixed delay, so reversals actuate late and the SOC shoots past its
//! band. False data injection leaves timing alone and swaps the threshold
//! pair the controller (and the local protection) believes in.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::plant::{Mode, SimConfig, SocTrace, ThresholdPair, TransitionEdge};
use crate::SimError;

const EPS: f64 = 1e-9;

/// What, if anything, the adversary does during a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AttackScenario {
    None,
    Ddos { delay_s: f64 },
    Fdi { thresholds: ThresholdPair },
}

impl AttackScenario {
    pub fn validate(&self) -> Result<(), SimError> {
        match self {
            AttackScenario::None => Ok(()),
            AttackScenario::Ddos { delay_s } => {
                if !delay_s.is_finite() || *delay_s < 0.0 || *delay_s > 300.0 {
                    Err(SimError::InvalidDelay(*delay_s))
                } else {
                    Ok(())
                }
            }
            AttackScenario::Fdi { thresholds } => {
                ThresholdPair::new(thresholds.low, thresholds.high).map(|_| ())
            }
        }
    }

    pub fn to_json(&self) -> String {
        let doc = ScenarioDoc::from(self);
        serde_json::to_string_pretty(&doc).expect("scenario serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, SimError> {
        let doc: ScenarioDoc = serde_json::from_str(text)?;
        let scenario = doc.into_scenario()?;
        scenario.validate()?;
        Ok(scenario)
    }
}

/// Flat on-disk form: `{"type": "...", "delay_s": ..., "low": ..., "high": ...}`.
#[derive(Debug, Serialize, Deserialize)]
struct ScenarioDoc {
    #[serde(rename = "type")]
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    delay_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    low: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    high: Option<f64>,
}

impl From<&AttackScenario> for ScenarioDoc {
    fn from(s: &AttackScenario) -> Self {
        match s {
            AttackScenario::None => {
                Self { kind: "none".into(), delay_s: None, low: None, high: None }
            }
            AttackScenario::Ddos { delay_s } => {
                Self { kind: "ddos".into(), delay_s: Some(*delay_s), low: None, high: None }
            }
            AttackScenario::Fdi { thresholds } => Self {
                kind: "fdi".into(),
                delay_s: None,
                low: Some(thresholds.low),
                high: Some(thresholds.high),
            },
        }
    }
}

impl ScenarioDoc {
    fn into_scenario(self) -> Result<AttackScenario, SimError> {
        match self.kind.as_str() {
            "none" => Ok(AttackScenario::None),
            "ddos" => {
                let delay_s =
                    self.delay_s.ok_or(SimError::MissingScenarioField("delay_s"))?;
                Ok(AttackScenario::Ddos { delay_s })
            }
            "fdi" => {
                let low = self.low.ok_or(SimError::MissingScenarioField("low"))?;
                let high = self.high.ok_or(SimError::MissingScenarioField("high"))?;
                Ok(AttackScenario::Fdi { thresholds: ThresholdPair::new(low, high)? })
            }
            other => Err(SimError::UnknownAttackType(other.to_string())),
        }
    }
}

/// FIFO command channel with a fixed transit delay.
///
/// Commands leave in send order at `send_time + delay`. Whatever is still in
/// transit when the simulation horizon ends is simply never delivered.
#[derive(Debug, Clone)]
pub struct DelayChannel {
    delay: f64,
    queue: VecDeque<(f64, Mode)>,
}

impl DelayChannel {
    pub fn new(delay: f64) -> Result<Self, SimError> {
        if !delay.is_finite() || delay < 0.0 {
            return Err(SimError::InvalidDelay(delay));
        }
        Ok(Self { delay, queue: VecDeque::new() })
    }

    pub fn delay(&self) -> f64 {
        self.delay
    }

    pub fn send(&mut self, time: f64, command: Mode) {
        self.queue.push_back((time, command));
    }

    /// Pop the oldest command whose delivery time has arrived. Callers poll
    /// with nondecreasing `now` until `None`.
    pub fn deliver(&mut self, now: f64) -> Option<Mode> {
        match self.queue.front() {
            Some((sent, _)) if sent + self.delay <= now + EPS => {
                self.queue.pop_front().map(|(_, cmd)| cmd)
            }
            _ => None,
        }
    }

    /// Commands still in transit (dropped if the run ends first).
    pub fn in_transit(&self) -> usize {
        self.queue.len()
    }
}

/// Return a configuration whose threshold pair has been overridden by the
/// injected values. The rest of the plant is untouched.
pub fn apply_fdi(cfg: &SimConfig, injected: ThresholdPair) -> Result<SimConfig, SimError> {
    let injected = ThresholdPair::new(injected.low, injected.high)?;
    Ok(SimConfig { thresholds: injected, ..*cfg })
}

/// Which side of the band a violating sample escaped through.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WhichThreshold {
    Low,
    High,
}

/// One attacked sample found outside the reference threshold band, i.e. past
/// the point where an unimpeded controller would already have reversed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdViolation {
    pub time: f64,
    pub soc: f64,
    pub threshold: WhichThreshold,
}

/// Damage summary comparing an attacked run against a reference run.
///
/// Reversals are paired by index; the percentage lists are aligned to the
/// shorter edge list. `soc_overshoot_pct` is signed: positive means the
/// attacked reversal happened above the reference one (late discharge),
/// negative below it (late charge).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactReport {
    pub edge_delay_pct: Vec<f64>,
    pub soc_overshoot_pct: Vec<f64>,
    pub matched_edges: Vec<(TransitionEdge, TransitionEdge)>,
    pub threshold_violations: Vec<ThresholdViolation>,
    /// The attack left the battery without effective charging after the
    /// window closed: no post-window sample charges while below the high
    /// threshold, and the post-window history actually deviates from the
    /// reference (an undisturbed run is never starved by its own shutdown
    /// profile).
    pub starved: bool,
}

fn pct(numerator: f64, denominator: f64) -> f64 {
    if denominator.abs() < 1e-12 {
        0.0
    } else {
        100.0 * numerator / denominator
    }
}

/// Quantify an attack by pairing reversals between runs sampled on the same
/// time grid. `thresholds` is the band of the *reference* controller and
/// `window` its control window.
pub fn impact_report(
    reference: &(SocTrace, Vec<TransitionEdge>),
    attacked: &(SocTrace, Vec<TransitionEdge>),
    thresholds: ThresholdPair,
    window: (f64, f64),
) -> Result<ImpactReport, SimError> {
    let (ref_trace, ref_edges) = reference;
    let (att_trace, att_edges) = attacked;

    if ref_trace.len() != att_trace.len()
        || ref_trace
            .samples
            .iter()
            .zip(&att_trace.samples)
            .any(|(a, b)| (a.time - b.time).abs() > EPS)
    {
        return Err(SimError::TimeGridMismatch);
    }

    let matched: Vec<_> = ref_edges.iter().zip(att_edges).map(|(r, a)| (*r, *a)).collect();
    let edge_delay_pct = matched.iter().map(|(r, a)| pct(a.time - r.time, r.time)).collect();
    let soc_overshoot_pct = matched.iter().map(|(r, a)| pct(a.soc - r.soc, r.soc)).collect();

    let threshold_violations = att_trace
        .samples
        .iter()
        .filter_map(|s| {
            if s.soc > thresholds.high + EPS {
                Some(ThresholdViolation { time: s.time, soc: s.soc, threshold: WhichThreshold::High })
            } else if s.soc < thresholds.low - EPS {
                Some(ThresholdViolation { time: s.time, soc: s.soc, threshold: WhichThreshold::Low })
            } else {
                None
            }
        })
        .collect();

    let (_, window_end) = window;
    let post = |trace: &SocTrace| {
        trace.samples.iter().filter(|s| s.time > window_end + EPS).copied().collect::<Vec<_>>()
    };
    let att_post = post(att_trace);
    let ref_post = post(ref_trace);
    let no_effective_charge = !att_post
        .iter()
        .any(|s| s.mode == Mode::Charging && s.soc < thresholds.high - EPS);
    let deviates = att_post
        .iter()
        .zip(&ref_post)
        .any(|(a, r)| a.mode != r.mode || (a.soc - r.soc).abs() > EPS);
    let starved = no_effective_charge && deviates;

    Ok(ImpactReport {
        edge_delay_pct,
        soc_overshoot_pct,
        matched_edges: matched,
        threshold_violations,
        starved,
    })
}
