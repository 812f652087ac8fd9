//! End-to-end attack scenarios with analytically derived expectations.
//!
//! With the default plant (1 %/s rates, band 35/80, window 50..150 s) the
//! first reversal is the discharge order at 80% SOC two seconds after the
//! window opens. A command delay of `d` seconds moves that reversal to
//! `52 + d` while the battery keeps charging, so the reversal SOC overshoots
//! by exactly `min(rate * d, 100 - high)` percentage points — clamped by the
//! physical 100% ceiling.

use evcs_sim::{
    extract_edges, impact_report, io, run_simulation, AttackScenario, Mode, SimConfig,
    ThresholdPair,
};

fn full_span_edges(cfg: &SimConfig, trace: &evcs_sim::SocTrace) -> Vec<evcs_sim::TransitionEdge> {
    extract_edges(trace, (0.0, cfg.duration))
}

fn run_with_full_edges(
    cfg: &SimConfig,
    attack: &AttackScenario,
) -> (evcs_sim::SocTrace, Vec<evcs_sim::TransitionEdge>) {
    let (trace, _) = run_simulation(cfg, attack).unwrap();
    let edges = full_span_edges(cfg, &trace);
    (trace, edges)
}

#[test]
fn repeated_runs_are_byte_identical() {
    let cfg = SimConfig::default();
    let a = run_simulation(&cfg, &AttackScenario::None).unwrap();
    let b = run_simulation(&cfg, &AttackScenario::None).unwrap();
    assert_eq!(io::trace_csv_string(&a.0), io::trace_csv_string(&b.0));
    assert_eq!(io::edges_csv_string(&a.1), io::edges_csv_string(&b.1));
}

#[test]
fn zero_delay_attack_equals_no_attack() {
    let cfg = SimConfig::default();
    let plain = run_simulation(&cfg, &AttackScenario::None).unwrap();
    let ddos0 = run_simulation(&cfg, &AttackScenario::Ddos { delay_s: 0.0 }).unwrap();
    assert_eq!(io::trace_csv_string(&plain.0), io::trace_csv_string(&ddos0.0));
    assert_eq!(plain.1, ddos0.1);
}

#[test]
fn sixty_second_delay_reproduces_expected_percentages() {
    let cfg = SimConfig::default();
    let reference = run_with_full_edges(&cfg, &AttackScenario::None);
    let attacked = run_with_full_edges(&cfg, &AttackScenario::Ddos { delay_s: 60.0 });

    // Reference reversal at (52 s, 80%); delayed actuation at (112 s, 100%).
    assert!((attacked.1[0].time - 112.0).abs() <= cfg.dt + 1e-9);
    assert!((attacked.1[0].soc - 100.0).abs() <= cfg.charge_rate * cfg.dt + 1e-9);

    let report = impact_report(&reference, &attacked, cfg.thresholds, cfg.window()).unwrap();
    assert!((report.edge_delay_pct[0] - 100.0 * 60.0 / 52.0).abs() < 0.5);
    assert!((report.soc_overshoot_pct[0] - 25.0).abs() < 0.5);
    assert!(!report.threshold_violations.is_empty());
}

#[test]
fn first_edge_overshoot_matches_min_of_ramp_and_ceiling() {
    let cfg = SimConfig::default();
    let reference = run_with_full_edges(&cfg, &AttackScenario::None);
    let tol = cfg.charge_rate * cfg.dt + 1e-9;
    for delay in [60.0, 120.0, 180.0, 240.0, 300.0] {
        let attacked = run_with_full_edges(&cfg, &AttackScenario::Ddos { delay_s: delay });
        assert!(!attacked.1.is_empty(), "delay {delay}: reversal must still actuate");
        let overshoot = attacked.1[0].soc - reference.1[0].soc;
        let predicted = (cfg.charge_rate * delay).min(100.0 - cfg.thresholds.high);
        assert!(
            (overshoot - predicted).abs() <= tol,
            "delay {delay}: overshoot {overshoot} != predicted {predicted}"
        );
    }
}

#[test]
fn small_delays_displace_every_reversal_by_rate_times_delay() {
    let cfg = SimConfig::default();
    let reference = run_with_full_edges(&cfg, &AttackScenario::None);
    let tol = cfg.charge_rate * cfg.dt + 1e-9;
    for delay in [1.0, 3.0, 5.0] {
        let attacked = run_with_full_edges(&cfg, &AttackScenario::Ddos { delay_s: delay });
        let pairs = reference.1.iter().zip(&attacked.1);
        let mut matched = 0;
        for (r, a) in pairs {
            let displacement = (a.soc - r.soc).abs();
            assert!(
                (displacement - cfg.charge_rate * delay).abs() <= tol,
                "delay {delay}: |{} - {}| != {}",
                a.soc,
                r.soc,
                cfg.charge_rate * delay
            );
            matched += 1;
        }
        assert!(matched >= 2, "delay {delay}: need at least two matched reversals");
    }
}

#[test]
fn severity_is_monotone_in_delay() {
    let cfg = SimConfig::default();
    let reference = run_with_full_edges(&cfg, &AttackScenario::None);
    let mut last_delay_pct = -1.0;
    let mut last_overshoot = -1.0;
    for delay in [0.0, 60.0, 120.0, 180.0, 240.0, 300.0] {
        let attacked = run_with_full_edges(&cfg, &AttackScenario::Ddos { delay_s: delay });
        let report = impact_report(&reference, &attacked, cfg.thresholds, cfg.window()).unwrap();
        let d = report.edge_delay_pct[0];
        let o = report.soc_overshoot_pct[0].abs();
        assert!(d >= last_delay_pct - 1e-9, "edge delay must not shrink with more delay");
        assert!(o >= last_overshoot - 1e-9, "overshoot magnitude must not shrink");
        last_delay_pct = d;
        last_overshoot = o;
    }
}

#[test]
fn five_minute_delay_starves_the_battery_above_the_low_threshold() {
    let cfg = SimConfig::default();
    let reference = run_with_full_edges(&cfg, &AttackScenario::None);
    let attacked = run_with_full_edges(&cfg, &AttackScenario::Ddos { delay_s: 300.0 });

    for s in attacked.0.samples.iter().filter(|s| s.time > cfg.window_end) {
        assert!(
            s.soc >= cfg.thresholds.low - 1e-9,
            "post-window SOC {} fell below the low threshold",
            s.soc
        );
        assert!(
            !(s.mode == Mode::Charging && s.soc < cfg.thresholds.high - 1e-9),
            "battery must see no effective charging after the window"
        );
    }

    let report = impact_report(&reference, &attacked, cfg.thresholds, cfg.window()).unwrap();
    assert!(report.starved);
}

#[test]
fn starvation_kicks_in_once_delay_exceeds_window_plus_first_command() {
    let cfg = SimConfig::default();
    let reference = run_with_full_edges(&cfg, &AttackScenario::None);
    // First command ~2 s after window open; window lasts 100 s.
    for delay in [110.0, 200.0, 300.0] {
        let attacked = run_with_full_edges(&cfg, &AttackScenario::Ddos { delay_s: delay });
        let report = impact_report(&reference, &attacked, cfg.thresholds, cfg.window()).unwrap();
        assert!(report.starved, "delay {delay} should starve the battery");
    }
}

#[test]
fn widening_fdi_band_strictly_widens_the_realized_swing() {
    let cfg = SimConfig::default();
    let tuples = [(35.0, 80.0), (10.0, 90.0), (5.0, 95.0), (0.0, 100.0)];
    let mut swings = Vec::new();
    for (low, high) in tuples {
        let attack = AttackScenario::Fdi { thresholds: ThresholdPair { low, high } };
        let (trace, _) = run_simulation(&cfg, &attack).unwrap();
        let min = trace.samples.iter().map(|s| s.soc).fold(f64::INFINITY, f64::min);
        let max = trace.samples.iter().map(|s| s.soc).fold(f64::NEG_INFINITY, f64::max);
        swings.push(max - min);
    }
    for pair in swings.windows(2) {
        assert!(pair[1] > pair[0] + 1e-9, "swings must strictly increase: {swings:?}");
    }
}

#[test]
fn full_band_fdi_touches_both_rails() {
    let cfg = SimConfig::default();
    let attack = AttackScenario::Fdi { thresholds: ThresholdPair { low: 0.0, high: 100.0 } };
    let (trace, _) = run_simulation(&cfg, &attack).unwrap();
    let min = trace.samples.iter().map(|s| s.soc).fold(f64::INFINITY, f64::min);
    let max = trace.samples.iter().map(|s| s.soc).fold(f64::NEG_INFINITY, f64::max);
    assert!(min <= 1e-9, "swing must touch 0, got min {min}");
    assert!(max >= 100.0 - 1e-9, "swing must touch 100, got max {max}");
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    prop_compose! {
        fn config_strategy()(initial in 5.0f64..95.0,
                             charge in 0.2f64..3.0,
                             discharge in 0.2f64..3.0,
                             low in 5.0f64..40.0,
                             span in 20.0f64..55.0) -> SimConfig {
            SimConfig {
                initial_soc: initial,
                charge_rate: charge,
                discharge_rate: discharge,
                thresholds: ThresholdPair { low, high: low + span },
                ..SimConfig::default()
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn soc_stays_in_percent_range(cfg in config_strategy(),
                                      delay in 0.0f64..300.0) {
            let (trace, _) = run_simulation(&cfg, &AttackScenario::Ddos { delay_s: delay }).unwrap();
            prop_assert!(trace.samples.iter().all(|s| (0.0..=100.0).contains(&s.soc)));
        }

        #[test]
        fn reversals_alternate(cfg in config_strategy()) {
            let (trace, _) = run_simulation(&cfg, &AttackScenario::None).unwrap();
            let edges = extract_edges(&trace, (0.0, cfg.duration));
            for pair in edges.windows(2) {
                prop_assert_eq!(pair[0].to, pair[1].from);
            }
        }

        #[test]
        fn runs_are_deterministic(cfg in config_strategy(),
                                  delay in 0.0f64..300.0) {
            let attack = AttackScenario::Ddos { delay_s: delay };
            let a = run_simulation(&cfg, &attack).unwrap();
            let b = run_simulation(&cfg, &attack).unwrap();
            prop_assert_eq!(io::trace_csv_string(&a.0), io::trace_csv_string(&b.0));
        }

        #[test]
        fn unattacked_reversals_land_on_the_band(cfg in config_strategy()) {
            let (trace, _) = run_simulation(&cfg, &AttackScenario::None).unwrap();
            let edges = extract_edges(&trace, (cfg.window_start, cfg.window_end));
            for e in &edges {
                let target = match e.to {
                    Mode::Discharging => cfg.thresholds.high,
                    Mode::Charging => cfg.thresholds.low,
                    Mode::Idle => unreachable!("idle is never commanded"),
                };
                let rate = match e.to {
                    Mode::Discharging => cfg.charge_rate,
                    _ => cfg.discharge_rate,
                };
                prop_assert!((e.soc - target).abs() <= rate * cfg.dt + 1e-9,
                             "edge {:?} not on band {:?}", e, cfg.thresholds);
            }
        }
    }
}
