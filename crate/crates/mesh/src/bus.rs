//! The alert bus: origin-to-all unicast with per-destination retransmits.
//!
//! Data frames are dropped independently with the configured probability;
//! acknowledgments always return, so retransmission happens exactly when a
//! frame was lost and a destination receives at most one copy per alert.
//! Per-destination delivery probability is therefore
//! 1 − drop_probability^(max_retries + 1), which the tests check against
//! seeded trials.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::node::{Alert, NodeId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BusConfig {
    /// Ticks a frame spends in transit, each direction.
    pub latency: u64,
    pub drop_probability: f64,
    /// Retransmissions after the first attempt.
    pub max_retries: u32,
    /// Ticks after a send at which a missing acknowledgment triggers the
    /// next attempt.
    pub ack_timeout: u64,
    pub seed: u64,
}

impl Default for BusConfig {
    fn default() -> Self {
        Self { latency: 1, drop_probability: 0.0, max_retries: 3, ack_timeout: 4, seed: 1 }
    }
}

impl BusConfig {
    pub fn validate(&self) -> Result<(), crate::MeshError> {
        if !self.drop_probability.is_finite() || !(0.0..=1.0).contains(&self.drop_probability) {
            return Err(crate::MeshError::BadConfig(format!(
                "drop probability {} outside [0, 1]",
                self.drop_probability
            )));
        }
        if self.ack_timeout == 0 {
            return Err(crate::MeshError::BadConfig("ack timeout must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    Ingest,
    Alert,
    Send,
    Drop,
    Deliver,
    Ack,
    State,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::Ingest => "ingest",
            EventKind::Alert => "alert",
            EventKind::Send => "send",
            EventKind::Drop => "drop",
            EventKind::Deliver => "deliver",
            EventKind::Ack => "ack",
            EventKind::State => "state",
        }
    }
}

/// One transcript line. `seq` is assigned after time-sorting, so a
/// finished log is strictly ordered by (tick, seq).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub tick: u64,
    pub seq: u64,
    pub kind: EventKind,
    pub node: NodeId,
    pub alert_id: Option<u64>,
    pub detail: String,
}

impl Event {
    pub(crate) fn at(tick: u64, kind: EventKind, node: NodeId, alert_id: Option<u64>, detail: String) -> Self {
        Self { tick, seq: 0, kind, node, alert_id, detail }
    }
}

/// Simulate the retransmit loop toward one destination, appending send /
/// drop / deliver / ack events. Returns the delivery tick, if any.
pub(crate) fn transmit(
    alert: &Alert,
    dest: NodeId,
    start: u64,
    bus: &BusConfig,
    rng: &mut ChaCha8Rng,
    events: &mut Vec<Event>,
) -> Option<u64> {
    let id = Some(alert.alert_id);
    for attempt in 0..=u64::from(bus.max_retries) {
        let sent = start + attempt * bus.ack_timeout;
        events.push(Event::at(sent, EventKind::Send, dest, id, format!("attempt={attempt}")));
        if rng.gen::<f64>() < bus.drop_probability {
            events.push(Event::at(sent, EventKind::Drop, dest, id, format!("attempt={attempt}")));
        } else {
            let delivered = sent + bus.latency;
            events.push(Event::at(
                delivered,
                EventKind::Deliver,
                dest,
                id,
                format!("attempt={attempt}"),
            ));
            events.push(Event::at(
                delivered + bus.latency,
                EventKind::Ack,
                alert.origin,
                id,
                format!("from={dest}"),
            ));
            return Some(delivered);
        }
    }
    None
}

/// Broadcast an alert from its origin to every other node, in node order.
/// Returns the event log sorted by tick (ties keep generation order) and
/// the delivery tick per destination.
pub fn broadcast(
    nodes: &[NodeId],
    alert: &Alert,
    bus: &BusConfig,
) -> Result<(Vec<Event>, Vec<(NodeId, Option<u64>)>), crate::MeshError> {
    bus.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(bus.seed);
    let mut events = Vec::new();
    let mut deliveries = Vec::new();
    for &dest in nodes.iter().filter(|&&n| n != alert.origin) {
        let tick = transmit(alert, dest, alert.detected_at, bus, &mut rng, &mut events);
        deliveries.push((dest, tick));
    }
    finalize(&mut events);
    Ok((events, deliveries))
}

/// Time-sort (stable) and number a batch of events.
pub(crate) fn finalize(events: &mut [Event]) {
    events.sort_by_key(|e| e.tick);
    for (i, e) in events.iter_mut().enumerate() {
        e.seq = i as u64;
    }
}
