//! Battery plant, hysteresis controller and trace bookkeeping.
//!
//! SOC is a percentage in [0, 100] integrated with a fixed step `dt`. The
//! supervisory controller is active only inside the control window and
//! commands `Discharging` when the SOC reaches the upper threshold and
//! `Charging` when it reaches the lower one ("at the instant of crossing"),
//! which yields relay-style oscillation between the two thresholds.
//!
//! Window boundary behaviour matters for the attack studies and is fixed as
//! follows:
//! * when the window opens with no command in effect, the plant connects its
//!   charging source locally (this is plant behaviour, not a supervisory
//!   command, so a delayed command path does not move it);
//! * outside the window the plant holds the last mode in effect, but its local
//!   protection keeps integration from driving the SOC past the active
//!   threshold band (a held discharge coasts down to the low threshold and
//!   parks there);
//! * commands still sitting in the network when the window closes actuate on
//!   delivery; only the end of the simulation discards them.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::attack::{AttackScenario, DelayChannel};
use crate::SimError;

/// Comparison slack absorbing float drift from repeated `soc += rate * dt`.
const EPS: f64 = 1e-9;

/// Operating mode of the battery unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Idle,
    Charging,
    Discharging,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Mode::Idle => "idle",
            Mode::Charging => "charging",
            Mode::Discharging => "discharging",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "idle" => Ok(Mode::Idle),
            "charging" => Ok(Mode::Charging),
            "discharging" => Ok(Mode::Discharging),
            other => Err(format!("unknown mode {other:?}")),
        }
    }
}

/// Hysteresis band: charge below `low`, discharge above `high`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPair {
    pub low: f64,
    pub high: f64,
}

impl ThresholdPair {
    pub fn new(low: f64, high: f64) -> Result<Self, SimError> {
        if !(low.is_finite() && high.is_finite()) || low < 0.0 || high > 100.0 || low >= high {
            return Err(SimError::InvalidThresholds { low, high });
        }
        Ok(Self { low, high })
    }
}

/// Plant and controller parameters. Rates are percent SOC per second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt: f64,
    pub duration: f64,
    pub initial_soc: f64,
    pub charge_rate: f64,
    pub discharge_rate: f64,
    pub window_start: f64,
    pub window_end: f64,
    pub thresholds: ThresholdPair,
    /// Recorded in run manifests; the plant itself is deterministic.
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 0.1,
            duration: 600.0,
            initial_soc: 78.0,
            charge_rate: 1.0,
            discharge_rate: 1.0,
            window_start: 50.0,
            window_end: 150.0,
            thresholds: ThresholdPair { low: 35.0, high: 80.0 },
            seed: 42,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: &str| Err(SimError::InvalidConfig(msg.to_string()));
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad("dt must be positive");
        }
        if !(self.charge_rate > 0.0 && self.discharge_rate > 0.0) {
            return bad("charge and discharge rates must be positive");
        }
        if !(0.0..=100.0).contains(&self.initial_soc) {
            return bad("initial_soc must lie in [0, 100]");
        }
        if self.window_start < 0.0 || self.window_end <= self.window_start {
            return bad("control window must satisfy 0 <= start < end");
        }
        if self.duration < self.window_end {
            return bad("duration must cover the control window");
        }
        ThresholdPair::new(self.thresholds.low, self.thresholds.high)?;
        Ok(())
    }

    pub fn window(&self) -> (f64, f64) {
        (self.window_start, self.window_end)
    }
}

/// One sampled instant: the mode is the one in effect over `[time, time + dt)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub time: f64,
    pub soc: f64,
    pub mode: Mode,
}

/// Complete SOC history of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SocTrace {
    pub samples: Vec<Sample>,
}

impl SocTrace {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// A control reversal: the first sample where the new active mode is in
/// effect. Only charge/discharge reversals count; the initial activation of
/// the charging source is session start, not a reversal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionEdge {
    pub time: f64,
    pub soc: f64,
    pub from: Mode,
    pub to: Mode,
}

/// Supervisory decision for one observation.
///
/// Inside the window the controller orders `Discharging` once the SOC has
/// reached `thresholds.high` and `Charging` once it has fallen to
/// `thresholds.low`; in between (and outside the window) it stays quiet.
/// Re-issuing `current_mode` is suppressed so each crossing produces exactly
/// one command.
pub fn controller_decide(
    soc: f64,
    thresholds: ThresholdPair,
    t: f64,
    window: (f64, f64),
    current_mode: Mode,
) -> Option<Mode> {
    let (start, end) = window;
    if t < start - EPS || t > end + EPS {
        return None;
    }
    let wanted = if soc >= thresholds.high - EPS {
        Mode::Discharging
    } else if soc <= thresholds.low + EPS {
        Mode::Charging
    } else {
        return None;
    };
    (wanted != current_mode).then_some(wanted)
}

/// Advance the SOC one step under `mode`, clamped to the physical [0, 100].
pub fn plant_step(soc: f64, mode: Mode, cfg: &SimConfig) -> f64 {
    let next = match mode {
        Mode::Idle => soc,
        Mode::Charging => soc + cfg.charge_rate * cfg.dt,
        Mode::Discharging => soc - cfg.discharge_rate * cfg.dt,
    };
    next.clamp(0.0, 100.0)
}

/// Step taken while the supervisory window is closed: the local battery
/// protection refuses to integrate past the threshold band, so a held charge
/// parks at `high` and a held discharge parks at `low`. SOC already beyond the
/// band (pushed there during the window) simply coasts back to the band edge.
fn banded_step(soc: f64, mode: Mode, cfg: &SimConfig) -> f64 {
    let next = match mode {
        Mode::Idle => soc,
        Mode::Charging => {
            if soc >= cfg.thresholds.high {
                soc
            } else {
                (soc + cfg.charge_rate * cfg.dt).min(cfg.thresholds.high)
            }
        }
        Mode::Discharging => {
            if soc <= cfg.thresholds.low {
                soc
            } else {
                (soc - cfg.discharge_rate * cfg.dt).max(cfg.thresholds.low)
            }
        }
    };
    next.clamp(0.0, 100.0)
}

/// Run one scenario and return the trace plus the in-window reversals.
///
/// The command path is a FIFO channel whose delay is zero unless the scenario
/// is a delay attack; FDI swaps the threshold pair before the run starts.
/// Everything is a pure function of `(cfg, attack)`.
pub fn run_simulation(
    cfg: &SimConfig,
    attack: &AttackScenario,
) -> Result<(SocTrace, Vec<TransitionEdge>), SimError> {
    cfg.validate()?;
    attack.validate()?;

    let effective = match attack {
        AttackScenario::Fdi { thresholds } => crate::attack::apply_fdi(cfg, *thresholds)?,
        _ => *cfg,
    };
    let delay = match attack {
        AttackScenario::Ddos { delay_s } => *delay_s,
        _ => 0.0,
    };
    let mut channel = DelayChannel::new(delay)?;

    let steps = (effective.duration / effective.dt + EPS).floor() as usize;
    let window_open = (effective.window_start / effective.dt - EPS).ceil() as usize;
    let window_close = (effective.window_end / effective.dt + EPS).floor() as usize;
    let window = effective.window();

    let mut samples = Vec::with_capacity(steps + 1);
    let mut soc = effective.initial_soc.clamp(0.0, 100.0);
    let mut in_effect = Mode::Idle;
    let mut last_command: Option<Mode> = None;

    for i in 0..=steps {
        let t = i as f64 * effective.dt;

        // Session start: connect the charging source when the window opens
        // and nothing is commanded yet. Local behaviour, never delayed.
        if i == window_open && in_effect == Mode::Idle {
            in_effect = Mode::Charging;
        }

        let observed_mode = last_command.unwrap_or(in_effect);
        if let Some(cmd) = controller_decide(soc, effective.thresholds, t, window, observed_mode) {
            channel.send(t, cmd);
            last_command = Some(cmd);
        }
        while let Some(cmd) = channel.deliver(t) {
            in_effect = cmd;
        }

        samples.push(Sample { time: t, soc, mode: in_effect });

        soc = if i >= window_open && i < window_close {
            plant_step(soc, in_effect, &effective)
        } else {
            banded_step(soc, in_effect, &effective)
        };
    }

    let trace = SocTrace { samples };
    let edges = extract_edges(&trace, window);
    Ok((trace, edges))
}

/// Collect charge/discharge reversals from a trace, keep those whose time
/// falls inside `window` (inclusive) and truncate to the first five, the
/// number a station log retains per session.
pub fn extract_edges(trace: &SocTrace, window: (f64, f64)) -> Vec<TransitionEdge> {
    let (start, end) = window;
    let mut edges = Vec::new();
    for pair in trace.samples.windows(2) {
        let (prev, cur) = (pair[0], pair[1]);
        if cur.mode != prev.mode
            && prev.mode != Mode::Idle
            && cur.mode != Mode::Idle
            && cur.time >= start - EPS
            && cur.time <= end + EPS
        {
            edges.push(TransitionEdge {
                time: cur.time,
                soc: cur.soc,
                from: prev.mode,
                to: cur.mode,
            });
            if edges.len() == 5 {
                break;
            }
        }
    }
    edges
}
