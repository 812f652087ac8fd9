//! End-to-end checks for the featurization pipeline: corpus generation,
//! counting invariants, scaling and CSV round-tripping.

use evcs_features::csvio::{dataset_from_csv, dataset_to_csv, read_csv, write_csv};
use evcs_features::scaler::ScalerModel;
use evcs_features::{
    featurize, fit_scaler, group_total, parse_trace, synth_corpus, synth_traces, Dataset,
    FeatureLayout, FeatureVector, Label, ScalerParams, SynthParams, FEATURE_DIM, MNEMONIC_SLOTS,
};

fn default_corpus(separation: f64) -> Dataset {
    let params = SynthParams { separation, ..SynthParams::default() };
    synth_corpus(&params, FeatureLayout::default_layout()).unwrap()
}

#[test]
fn corpus_has_expected_shape_and_group_sums() {
    let params = SynthParams::default();
    let traces = synth_traces(&params).unwrap();
    let layout = FeatureLayout::default_layout();
    assert_eq!(traces.len(), 1008);

    let data = synth_corpus(&params, layout).unwrap();
    assert_eq!(data.len(), 1008);
    assert_eq!(data.class_counts(), (561, 447));

    for ((trace, label), row) in traces.iter().zip(&data.rows) {
        assert_eq!(row.values.len(), FEATURE_DIM);
        assert_eq!(*label, row.label);
        // The group slots partition the trace: their sum is its length.
        assert_eq!(group_total(&row.values), trace.mnemonics.len() as f64);
    }
}

#[test]
fn group_slots_dominate_member_mnemonic_slots() {
    let layout = FeatureLayout::default_layout();
    let data = default_corpus(0.7);
    for row in &data.rows {
        let mut member_sum = vec![0.0; FEATURE_DIM];
        for (slot, m) in layout.mnemonics().iter().enumerate() {
            member_sum[layout.group_slot(m)] += row.values[slot];
        }
        for g in MNEMONIC_SLOTS..FEATURE_DIM {
            assert!(row.values[g] >= member_sum[g]);
        }
    }
}

#[test]
fn scaled_corpus_lies_in_unit_interval() {
    let mut data = default_corpus(0.9);
    let params = fit_scaler(&data, ScalerModel::MinMax).unwrap();
    params.apply_dataset(&mut data);
    for row in &data.rows {
        assert!(row.values.iter().all(|v| (0.0..=1.0).contains(v)));
    }
}

#[test]
fn csv_round_trip_is_exact_on_full_corpus() {
    let mut data = default_corpus(0.9);
    let scale = fit_scaler(&data, ScalerModel::MinMax).unwrap();
    scale.apply_dataset(&mut data);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("corpus.csv");
    write_csv(&data, &path).unwrap();
    let back = read_csv(&path, &data.layout).unwrap();
    assert_eq!(back, data);
}

#[test]
fn full_separation_admits_a_single_feature_rule() {
    let data = default_corpus(1.0);
    // Look for one feature whose class ranges do not overlap; the midpoint
    // threshold then classifies the whole corpus perfectly.
    let mut found = None;
    for j in 0..FEATURE_DIM {
        let mut min_r = f64::INFINITY;
        let mut max_r = f64::NEG_INFINITY;
        let mut min_n = f64::INFINITY;
        let mut max_n = f64::NEG_INFINITY;
        for row in &data.rows {
            let v = row.values[j];
            if row.label == Label::Ransomware {
                min_r = min_r.min(v);
                max_r = max_r.max(v);
            } else {
                min_n = min_n.min(v);
                max_n = max_n.max(v);
            }
        }
        if min_r > max_n || min_n > max_r {
            found = Some(j);
            break;
        }
    }
    assert!(found.is_some(), "no single feature separates the classes at separation=1");
}

#[test]
fn zero_separation_scores_near_chance() {
    let data = default_corpus(0.0);
    // Fixed discriminant: fraction of logical+shift group activity. Under
    // identical class distributions its ranking carries no information, so
    // the pairwise ranking statistic should sit near 0.5.
    let layout = FeatureLayout::default_layout();
    let logical = layout.group_slot("xor");
    let shift = layout.group_slot("shl");
    let score = |row: &FeatureVector| {
        let total = group_total(&row.values).max(1.0);
        (row.values[logical] + row.values[shift]) / total
    };
    let pos: Vec<f64> = data
        .rows
        .iter()
        .filter(|r| r.label == Label::Ransomware)
        .map(score)
        .collect();
    let neg: Vec<f64> = data
        .rows
        .iter()
        .filter(|r| r.label == Label::Normal)
        .map(score)
        .collect();
    let mut wins = 0.0;
    for p in &pos {
        for n in &neg {
            if p > n {
                wins += 1.0;
            } else if p == n {
                wins += 0.5;
            }
        }
    }
    let auc = wins / (pos.len() * neg.len()) as f64;
    assert!((0.4..=0.6).contains(&auc), "auc {auc} too far from chance");
}

#[test]
fn million_line_trace_parses_completely() {
    let mut text = String::with_capacity(12 * 1_000_000);
    for i in 0..1_000_000u32 {
        text.push_str(if i % 3 == 0 { "mov eax, 1\n" } else { "xor ebx, ebx\n" });
    }
    let trace = parse_trace(&text);
    assert_eq!(trace.mnemonics.len(), 1_000_000);
    assert_eq!(trace.skipped_lines, 0);
}

mod properties {
    use super::*;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    const ALPHABET: &[&str] =
        &["mov", "add", "xor", "shl", "call", "lodsb", "push", "endbr64", "frobnicate"];

    prop_compose! {
        fn arb_trace()(ids in proptest::collection::vec(0..ALPHABET.len(), 0..400)) -> Vec<String> {
            ids.into_iter().map(|i| ALPHABET[i].to_string()).collect()
        }
    }

    proptest! {
        #[test]
        fn featurize_is_permutation_invariant(mnemonics in arb_trace(), shuffle_seed in any::<u64>()) {
            let layout = FeatureLayout::default_layout();
            let trace = evcs_features::InstructionTrace { mnemonics: mnemonics.clone(), skipped_lines: 0 };
            let v = featurize(&trace, layout);

            let mut shuffled = mnemonics;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(shuffle_seed);
            shuffled.shuffle(&mut rng);
            let trace2 = evcs_features::InstructionTrace { mnemonics: shuffled, skipped_lines: 0 };
            prop_assert_eq!(featurize(&trace2, layout), v);
        }

        #[test]
        fn unit_bounds_scaler_is_identity_on_scaled_data(raw in proptest::collection::vec(0.0f64..500.0, FEATURE_DIM)) {
            let mut lo = vec![0.0; FEATURE_DIM];
            let mut hi = vec![0.0; FEATURE_DIM];
            for i in 0..FEATURE_DIM {
                lo[i] = raw[i] * 0.25;
                hi[i] = raw[i] * 0.25 + 1.0 + raw[i];
            }
            let fitted = ScalerParams { kind: ScalerModel::MinMax, lo, hi };
            let mut v = raw;
            fitted.apply(&mut v);
            // v is now inside [0,1]; a scaler pinned to those bounds must not move it.
            let unit = ScalerParams {
                kind: ScalerModel::MinMax,
                lo: vec![0.0; FEATURE_DIM],
                hi: vec![1.0; FEATURE_DIM],
            };
            let mut w = v.clone();
            unit.apply(&mut w);
            prop_assert_eq!(w, v);
        }

        #[test]
        fn scaling_preserves_per_feature_order(
            a in proptest::collection::vec(0.0f64..100.0, FEATURE_DIM),
            b in proptest::collection::vec(0.0f64..100.0, FEATURE_DIM),
        ) {
            let layout = FeatureLayout::default_layout().clone();
            let rows = vec![
                FeatureVector::new(a.clone(), Label::Ransomware).unwrap(),
                FeatureVector::new(b.clone(), Label::Normal).unwrap(),
            ];
            let data = Dataset { rows, layout };
            let params = fit_scaler(&data, ScalerModel::MinMax).unwrap();
            let (mut sa, mut sb) = (a.clone(), b.clone());
            params.apply(&mut sa);
            params.apply(&mut sb);
            for i in 0..FEATURE_DIM {
                if a[i] <= b[i] {
                    prop_assert!(sa[i] <= sb[i]);
                } else {
                    prop_assert!(sa[i] >= sb[i]);
                }
            }
        }

        #[test]
        fn csv_round_trips_arbitrary_unit_values(
            vals in proptest::collection::vec(0.0f64..1.0, FEATURE_DIM),
            label_bit in any::<bool>(),
        ) {
            let layout = FeatureLayout::default_layout().clone();
            let label = if label_bit { Label::Normal } else { Label::Ransomware };
            let data = Dataset {
                rows: vec![FeatureVector::new(vals, label).unwrap()],
                layout,
            };
            let text = dataset_to_csv(&data);
            let back = dataset_from_csv(&text, &data.layout).unwrap();
            prop_assert_eq!(back, data);
        }
    }
}
