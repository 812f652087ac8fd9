//! Node identities, alert severities, and the per-node mitigation state
//! machine.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::MeshError;

/// The four layers of the monitored installation, supervisory layer first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Layer {
    Scada,
    GenTransDist,
    EvseNetwork,
    Caev,
}

impl Layer {
    pub const ALL: [Layer; 4] =
        [Layer::Scada, Layer::GenTransDist, Layer::EvseNetwork, Layer::Caev];

    pub fn name(self) -> &'static str {
        match self {
            Layer::Scada => "scada",
            Layer::GenTransDist => "gen-trans-dist",
            Layer::EvseNetwork => "evse-network",
            Layer::Caev => "caev",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId {
    pub layer: Layer,
    pub index: usize,
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.layer.name(), self.index)
    }
}

impl FromStr for NodeId {
    type Err = MeshError;

    /// Parse `layer` or `layer:index`; a bare layer means index 0.
    fn from_str(s: &str) -> Result<Self, MeshError> {
        let (name, index) = match s.split_once(':') {
            Some((name, idx)) => {
                let index =
                    idx.parse::<usize>().map_err(|_| MeshError::UnknownNode(s.to_string()))?;
                (name, index)
            }
            None => (s, 0),
        };
        let layer = Layer::ALL
            .into_iter()
            .find(|l| l.name() == name)
            .ok_or_else(|| MeshError::UnknownNode(s.to_string()))?;
        Ok(NodeId { layer, index })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Severity {
    Low,
    High,
    Critical,
}

impl Severity {
    pub fn name(self) -> &'static str {
        match self {
            Severity::Low => "low",
            Severity::High => "high",
            Severity::Critical => "critical",
        }
    }
}

/// Band a ransomware score that already cleared the detection threshold:
/// scores below 0.9 are Low, [0.9, 0.99) High, and [0.99, 1] Critical.
pub fn severity_for(score: f64) -> Severity {
    if score >= 0.99 {
        Severity::Critical
    } else if score >= 0.9 {
        Severity::High
    } else {
        Severity::Low
    }
}

/// Mitigation ladder, mildest first. Within one scenario a node only ever
/// climbs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Mitigation {
    #[default]
    Normal,
    BackupOn,
    Isolated,
    Shutdown,
}

impl Mitigation {
    pub fn name(self) -> &'static str {
        match self {
            Mitigation::Normal => "normal",
            Mitigation::BackupOn => "backup-on",
            Mitigation::Isolated => "isolated",
            Mitigation::Shutdown => "shutdown",
        }
    }
}

/// The mitigation a severity demands on its own.
fn demanded(severity: Severity) -> Mitigation {
    match severity {
        Severity::Low => Mitigation::BackupOn,
        Severity::High => Mitigation::Isolated,
        Severity::Critical => Mitigation::Shutdown,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Alert {
    pub alert_id: u64,
    pub origin: NodeId,
    pub detected_at: u64,
    /// Ransomware likelihood in [0, 1].
    pub score: f64,
    pub severity: Severity,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NodeState {
    pub mitigation: Mitigation,
    pub seen_alerts: BTreeSet<u64>,
}

/// Apply one alert to a node's state. Already-seen alert ids leave the
/// state untouched; new ones escalate the mitigation to at least the
/// severity's demanded level, never downward.
pub fn handle_alert(state: &NodeState, alert: &Alert) -> NodeState {
    if state.seen_alerts.contains(&alert.alert_id) {
        return state.clone();
    }
    let mut next = state.clone();
    next.seen_alerts.insert(alert.alert_id);
    next.mitigation = next.mitigation.max(demanded(alert.severity));
    next
}
