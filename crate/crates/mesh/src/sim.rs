//! The mesh simulator: timed feature-vector injections are scored by the
//! owning node, alerts broadcast to every other node, and each delivery
//! escalates the receiver's mitigation. All randomness comes from the bus
//! seed, so a scenario replays byte for byte.

use ndarray::{Array2, ArrayView2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bus::{finalize, transmit, BusConfig, Event, EventKind};
use crate::node::{handle_alert, severity_for, Alert, Layer, Mitigation, NodeId, NodeState};
use crate::MeshError;
use evcs_nn::Model;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshConfig {
    /// Ransomware-likelihood threshold at which a node raises an alert.
    pub threshold: f64,
    /// Node count per layer, supervisory layer first.
    pub nodes_per_layer: [usize; 4],
}

impl Default for MeshConfig {
    fn default() -> Self {
        Self { threshold: 0.5, nodes_per_layer: [1, 1, 1, 1] }
    }
}

impl MeshConfig {
    pub fn validate(&self) -> Result<(), MeshError> {
        if !self.threshold.is_finite() || !(0.0..=1.0).contains(&self.threshold) {
            return Err(MeshError::BadConfig(format!(
                "threshold {} outside [0, 1]",
                self.threshold
            )));
        }
        if self.nodes_per_layer.iter().any(|&n| n == 0) {
            return Err(MeshError::BadConfig("every layer needs at least one node".into()));
        }
        Ok(())
    }
}

/// One scripted sample: at `tick`, feed data row `row` to `node`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Injection {
    pub tick: u64,
    pub node: NodeId,
    pub row: usize,
}

/// Parse a scenario script: one `tick,node,row:IDX` record per line, with
/// blank lines and `#` comments skipped.
pub fn parse_scenario(text: &str) -> Result<Vec<Injection>, MeshError> {
    let mut injections = Vec::new();
    for (i, raw_line) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw_line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 3 {
            return Err(MeshError::MalformedScenario {
                line,
                message: format!("expected 3 fields, found {}", fields.len()),
            });
        }
        let tick = fields[0].trim().parse::<u64>().map_err(|_| MeshError::MalformedScenario {
            line,
            message: format!("'{}' is not a tick", fields[0].trim()),
        })?;
        let node = fields[1].trim().parse::<NodeId>().map_err(|e| {
            MeshError::MalformedScenario { line, message: e.to_string() }
        })?;
        let row_ref = fields[2].trim();
        let row = row_ref
            .strip_prefix("row:")
            .and_then(|r| r.parse::<usize>().ok())
            .ok_or_else(|| MeshError::MalformedScenario {
                line,
                message: format!("'{row_ref}' is not a row reference (row:IDX)"),
            })?;
        injections.push(Injection { tick, node, row });
    }
    Ok(injections)
}

/// A detection mesh: one shared trained model, one state machine per node.
pub struct Mesh {
    model: Model,
    threshold: f64,
    nodes: Vec<(NodeId, NodeState)>,
    next_alert_id: u64,
}

impl Mesh {
    pub fn new(model: Model, config: &MeshConfig) -> Result<Self, MeshError> {
        config.validate()?;
        let mut nodes = Vec::new();
        for (layer, &count) in Layer::ALL.iter().zip(&config.nodes_per_layer) {
            for index in 0..count {
                nodes.push((NodeId { layer: *layer, index }, NodeState::default()));
            }
        }
        Ok(Self { model, threshold: config.threshold, nodes, next_alert_id: 0 })
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn node_ids(&self) -> Vec<NodeId> {
        self.nodes.iter().map(|(id, _)| *id).collect()
    }

    pub fn state(&self, node: NodeId) -> Option<&NodeState> {
        self.nodes.iter().find(|(id, _)| *id == node).map(|(_, s)| s)
    }

    /// Ransomware likelihood of one scaled feature vector — the same
    /// forward pass the offline evaluator runs, on a single-row batch.
    pub fn score(&self, vector: &[f64]) -> Result<f64, MeshError> {
        let expected = self.model.spec().input_width();
        if vector.len() != expected {
            return Err(MeshError::VectorWidth { got: vector.len(), expected });
        }
        if let Some((index, &value)) =
            vector.iter().enumerate().find(|(_, v)| !v.is_finite() || !(0.0..=1.0).contains(*v))
        {
            return Err(MeshError::UnscaledValue { index, value });
        }
        let x = Array2::from_shape_vec((1, expected), vector.to_vec())
            .expect("row shape checked above");
        let probs = self.model.forward(x.view(), false, 0)?;
        Ok(1.0 - probs[0])
    }

    /// Score a vector at a node; raise an alert iff the score reaches the
    /// detection threshold. Alert ids are unique across the mesh.
    pub fn ingest(
        &mut self,
        node: NodeId,
        vector: &[f64],
        now: u64,
    ) -> Result<Option<Alert>, MeshError> {
        if self.state(node).is_none() {
            return Err(MeshError::UnknownNode(node.to_string()));
        }
        let score = self.score(vector)?;
        if score < self.threshold {
            return Ok(None);
        }
        let alert_id = self.next_alert_id;
        self.next_alert_id += 1;
        Ok(Some(Alert {
            alert_id,
            origin: node,
            detected_at: now,
            score,
            severity: severity_for(score),
        }))
    }

    /// Record an alert at a node, returning the new mitigation level when
    /// the delivery escalated it.
    fn apply(&mut self, node: NodeId, alert: &Alert) -> Option<Mitigation> {
        let slot = self.nodes.iter_mut().find(|(id, _)| *id == node)?;
        let before = slot.1.mitigation;
        slot.1 = handle_alert(&slot.1, alert);
        (slot.1.mitigation > before).then_some(slot.1.mitigation)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshTranscript {
    pub events: Vec<Event>,
    pub final_states: Vec<(NodeId, Mitigation)>,
}

/// Run a scripted scenario to completion.
///
/// Injections fire in (tick, script order); every alert is applied at its
/// origin and broadcast to all other nodes with per-destination
/// retransmits. Bus outcomes are drawn in a fixed order from one seeded
/// generator, so the transcript is a pure function of
/// (mesh, scenario, data, bus).
pub fn run_mesh_sim(
    mesh: &mut Mesh,
    injections: &[Injection],
    data: ArrayView2<f64>,
    bus: &BusConfig,
) -> Result<MeshTranscript, MeshError> {
    bus.validate()?;
    for inj in injections {
        if inj.row >= data.nrows() {
            return Err(MeshError::BadConfig(format!(
                "injection references row {} of a {}-row data set",
                inj.row,
                data.nrows()
            )));
        }
        if mesh.state(inj.node).is_none() {
            return Err(MeshError::UnknownNode(inj.node.to_string()));
        }
    }

    let mut order: Vec<&Injection> = injections.iter().collect();
    order.sort_by_key(|inj| inj.tick);

    let node_ids = mesh.node_ids();
    let mut rng = ChaCha8Rng::seed_from_u64(bus.seed);
    let mut raw: Vec<Event> = Vec::new();
    let mut alerts: Vec<Alert> = Vec::new();

    for inj in order {
        raw.push(Event::at(
            inj.tick,
            EventKind::Ingest,
            inj.node,
            None,
            format!("row={}", inj.row),
        ));
        let vector = data.row(inj.row).to_vec();
        if let Some(alert) = mesh.ingest(inj.node, &vector, inj.tick)? {
            raw.push(Event::at(
                inj.tick,
                EventKind::Alert,
                inj.node,
                Some(alert.alert_id),
                format!("score={};severity={}", alert.score, alert.severity.name()),
            ));
            for &dest in node_ids.iter().filter(|&&n| n != alert.origin) {
                transmit(&alert, dest, alert.detected_at, bus, &mut rng, &mut raw);
            }
            alerts.push(alert);
        }
    }

    finalize(&mut raw);

    // Apply state changes in transcript order; the origin reacts at its
    // alert event, every other node at its delivery.
    let mut events: Vec<Event> = Vec::with_capacity(raw.len());
    for e in raw {
        let induced = match e.kind {
            EventKind::Alert | EventKind::Deliver => {
                let id = e.alert_id.expect("alert and deliver events carry ids");
                let alert = alerts.iter().find(|a| a.alert_id == id).expect("alert recorded");
                mesh.apply(e.node, alert).map(|level| {
                    Event::at(
                        e.tick,
                        EventKind::State,
                        e.node,
                        Some(id),
                        format!("mitigation={}", level.name()),
                    )
                })
            }
            _ => None,
        };
        events.push(e);
        events.extend(induced);
    }
    for (i, e) in events.iter_mut().enumerate() {
        e.seq = i as u64;
    }

    let final_states =
        mesh.nodes.iter().map(|(id, state)| (*id, state.mitigation)).collect();
    Ok(MeshTranscript { events, final_states })
}

/// Render a transcript as its stable CSV form.
pub fn transcript_to_csv(transcript: &MeshTranscript) -> String {
    let mut out = String::from("tick,seq,event_type,node,alert_id,detail\n");
    for e in &transcript.events {
        let id = e.alert_id.map(|v| v.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            e.tick,
            e.seq,
            e.kind.name(),
            e.node,
            id,
            e.detail
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use evcs_nn::ModelSpec;

    fn mesh_with_threshold(threshold: f64) -> Mesh {
        let model = Model::build(&ModelSpec::dnn(), 5).unwrap();
        Mesh::new(model, &MeshConfig { threshold, ..MeshConfig::default() }).unwrap()
    }

    fn unit_rows(n: usize) -> Array2<f64> {
        Array2::from_elem((n, 140), 0.25)
    }

    #[test]
    fn scenario_lines_parse_and_reject() {
        let script = "# demo\n\n0,scada,row:0\n5, evse-network:1 , row:12\n";
        let inj = parse_scenario(script).unwrap();
        assert_eq!(inj.len(), 2);
        assert_eq!(inj[0], Injection { tick: 0, node: "scada".parse().unwrap(), row: 0 });
        assert_eq!(inj[1].row, 12);

        for bad in ["x,scada,row:0", "0,submarine,row:0", "0,scada,0", "0,scada"] {
            assert!(matches!(
                parse_scenario(bad),
                Err(MeshError::MalformedScenario { line: 1, .. })
            ));
        }
    }

    #[test]
    fn empty_scenario_leaves_everything_normal() {
        let mut mesh = mesh_with_threshold(0.5);
        let t = run_mesh_sim(&mut mesh, &[], unit_rows(1).view(), &BusConfig::default()).unwrap();
        assert!(t.events.is_empty());
        assert!(t.final_states.iter().all(|(_, m)| *m == Mitigation::Normal));
    }

    #[test]
    fn zero_threshold_alerts_and_escalates_every_layer() {
        let mut mesh = mesh_with_threshold(0.0);
        let injections = parse_scenario("0,scada,row:0\n").unwrap();
        let bus = BusConfig::default();
        let t = run_mesh_sim(&mut mesh, &injections, unit_rows(1).view(), &bus).unwrap();

        assert_eq!(t.events.iter().filter(|e| e.kind == EventKind::Alert).count(), 1);
        assert_eq!(t.final_states.len(), 4);
        assert!(t.final_states.iter().all(|(_, m)| *m >= Mitigation::BackupOn));
        // One state change per node: origin at the alert, the rest on
        // delivery.
        assert_eq!(t.events.iter().filter(|e| e.kind == EventKind::State).count(), 4);
    }

    #[test]
    fn saturated_threshold_never_alerts() {
        let mut mesh = mesh_with_threshold(1.0);
        let injections = parse_scenario("0,scada,row:0\n3,caev,row:1\n").unwrap();
        let t = run_mesh_sim(&mut mesh, &injections, unit_rows(2).view(), &BusConfig::default())
            .unwrap();
        assert_eq!(t.events.iter().filter(|e| e.kind == EventKind::Alert).count(), 0);
        assert_eq!(t.events.len(), 2);
        assert!(t.final_states.iter().all(|(_, m)| *m == Mitigation::Normal));
    }

    #[test]
    fn transcripts_replay_byte_for_byte() {
        let bus = BusConfig { drop_probability: 0.4, seed: 21, ..BusConfig::default() };
        let injections = parse_scenario("0,scada,row:0\n2,caev:0,row:0\n").unwrap();
        let run = || {
            let mut mesh = mesh_with_threshold(0.0);
            let t = run_mesh_sim(&mut mesh, &injections, unit_rows(1).view(), &bus).unwrap();
            transcript_to_csv(&t)
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn out_of_range_rows_and_unknown_nodes_are_rejected_up_front() {
        let mut mesh = mesh_with_threshold(0.5);
        let bad_row = [Injection { tick: 0, node: "scada".parse().unwrap(), row: 9 }];
        assert!(matches!(
            run_mesh_sim(&mut mesh, &bad_row, unit_rows(1).view(), &BusConfig::default()),
            Err(MeshError::BadConfig(_))
        ));
        let bad_node =
            [Injection { tick: 0, node: "scada:7".parse().unwrap(), row: 0 }];
        assert!(matches!(
            run_mesh_sim(&mut mesh, &bad_node, unit_rows(1).view(), &BusConfig::default()),
            Err(MeshError::UnknownNode(_))
        ));
    }

    #[test]
    fn unscaled_vectors_are_rejected() {
        let mesh = mesh_with_threshold(0.5);
        let mut v = vec![0.5; 140];
        v[7] = 7.3;
        assert!(matches!(
            mesh.score(&v),
            Err(MeshError::UnscaledValue { index: 7, .. })
        ));
        assert!(matches!(
            mesh.score(&vec![0.5; 139]),
            Err(MeshError::VectorWidth { got: 139, expected: 140 })
        ));
    }
}
