//! Mesh scenarios driven by a model trained on a separable synthetic
//! corpus: detection at one node propagates mitigation everywhere, online
//! scores match the offline evaluator, and lossy runs replay exactly.

use evcs_eval::subset_split;
use evcs_features::{fit_scaler, synth_corpus, Dataset, FeatureLayout, ScalerModel, SynthParams};
use evcs_mesh::{
    parse_scenario, run_mesh_sim, transcript_to_csv, BusConfig, EventKind, Mesh, MeshConfig,
    Mitigation,
};
use evcs_nn::{predict, train, Model, ModelSpec, TrainConfig};
use ndarray::Array2;

/// Scaled separable corpus plus a model trained on it.
fn trained_setup() -> (Dataset, Model) {
    let layout = FeatureLayout::default_layout();
    let params = SynthParams {
        n_ransomware: 40,
        n_normal: 32,
        separation: 1.0,
        seed: 17,
        ..SynthParams::default()
    };
    let mut corpus = synth_corpus(&params, layout).unwrap();
    let scaler = fit_scaler(&corpus, ScalerModel::MinMax).unwrap();
    scaler.apply_dataset(&mut corpus);

    let all: Vec<usize> = (0..corpus.len()).collect();
    let split = subset_split(&corpus, &all).unwrap();
    let cfg = TrainConfig { epochs: 8, batch_size: 8, seed: 42, ..TrainConfig::default() };
    let (model, history) = train(&ModelSpec::dnn(), &split, &split, &cfg).unwrap();
    assert!(history.epochs.last().unwrap().val_acc >= 0.99, "training sanity");
    (corpus, model)
}

fn matrix(corpus: &Dataset) -> Array2<f64> {
    let mut x = Array2::zeros((corpus.len(), 140));
    for (i, row) in corpus.rows.iter().enumerate() {
        for (j, &v) in row.values.iter().enumerate() {
            x[(i, j)] = v;
        }
    }
    x
}

#[test]
fn detection_at_one_node_escalates_all_layers() {
    let (corpus, model) = trained_setup();
    let data = matrix(&corpus);
    let mut mesh = Mesh::new(model, &MeshConfig::default()).unwrap();

    // Row 0 is ransomware; the last row is benign.
    let ransomware_row = 0;
    let benign_row = corpus.len() - 1;

    let script = format!("0,scada,row:{ransomware_row}\n");
    let injections = parse_scenario(&script).unwrap();
    let t = run_mesh_sim(&mut mesh, &injections, data.view(), &BusConfig::default()).unwrap();
    assert_eq!(t.events.iter().filter(|e| e.kind == EventKind::Alert).count(), 1);
    assert!(t.final_states.iter().all(|(_, m)| *m >= Mitigation::BackupOn));
    let alert = t.events.iter().find(|e| e.kind == EventKind::Alert).unwrap();
    assert!(alert.detail.starts_with("score=0.9"), "confident detection: {}", alert.detail);

    // A fresh mesh fed only benign traffic stays quiet.
    assert_eq!(corpus.rows[benign_row].label, evcs_features::Label::Normal);
    let (_, model2) = trained_setup();
    let mut quiet = Mesh::new(model2, &MeshConfig::default()).unwrap();
    let script = format!("0,evse-network,row:{benign_row}\n");
    let injections = parse_scenario(&script).unwrap();
    let t = run_mesh_sim(&mut quiet, &injections, data.view(), &BusConfig::default()).unwrap();
    assert_eq!(t.events.iter().filter(|e| e.kind == EventKind::Alert).count(), 0);
    assert!(t.final_states.iter().all(|(_, m)| *m == Mitigation::Normal));
}

#[test]
fn online_scores_equal_offline_predictions_bitwise() {
    let (corpus, model) = trained_setup();
    let data = matrix(&corpus);
    let offline = predict(&model, data.view()).unwrap();
    let mesh = Mesh::new(model, &MeshConfig::default()).unwrap();
    for (i, row) in corpus.rows.iter().enumerate() {
        let online = mesh.score(&row.values).unwrap();
        let expected = 1.0 - offline[i];
        assert_eq!(online.to_bits(), expected.to_bits(), "row {i}");
    }
}

#[test]
fn lossy_runs_replay_exactly_and_never_deescalate() {
    let (corpus, model) = trained_setup();
    let data = matrix(&corpus);
    let script = "0,scada,row:0\n1,caev,row:1\n4,gen-trans-dist,row:2\n9,evse-network,row:40\n";
    let injections = parse_scenario(script).unwrap();
    let bus = BusConfig {
        drop_probability: 0.3,
        max_retries: 10,
        latency: 1,
        ack_timeout: 3,
        seed: 77,
    };

    let mut mesh = Mesh::new(model, &MeshConfig::default()).unwrap();
    let t = run_mesh_sim(&mut mesh, &injections, data.view(), &bus).unwrap();

    let (_, model_again) = trained_setup();
    let mut mesh_again = Mesh::new(model_again, &MeshConfig::default()).unwrap();
    let t_again = run_mesh_sim(&mut mesh_again, &injections, data.view(), &bus).unwrap();
    assert_eq!(transcript_to_csv(&t), transcript_to_csv(&t_again));

    // Mitigation is monotone per node along the transcript, and every
    // reaction pairs with an alert or delivery at the same tick.
    let parse_level = |detail: &str| match detail.trim_start_matches("mitigation=") {
        "normal" => Mitigation::Normal,
        "backup-on" => Mitigation::BackupOn,
        "isolated" => Mitigation::Isolated,
        "shutdown" => Mitigation::Shutdown,
        other => panic!("unexpected state detail {other}"),
    };
    let mut last: std::collections::BTreeMap<String, Mitigation> = Default::default();
    for e in &t.events {
        if e.kind != EventKind::State {
            continue;
        }
        let level = parse_level(&e.detail);
        let node = e.node.to_string();
        if let Some(prev) = last.get(&node) {
            assert!(level > *prev, "node {node} went {prev:?} -> {level:?}");
        }
        last.insert(node, level);
        let cause = t.events.iter().any(|c| {
            (c.kind == EventKind::Alert || c.kind == EventKind::Deliver)
                && c.node == e.node
                && c.tick == e.tick
                && c.alert_id == e.alert_id
        });
        assert!(cause, "state change without a same-tick cause: {e:?}");
    }
    assert!(!last.is_empty(), "the scenario should produce state changes");
}
