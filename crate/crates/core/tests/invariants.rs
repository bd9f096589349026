use std::f64::consts::PI;

use approx::assert_relative_eq;
use harvest_core::stability::{classify_k1, classify_sharp, DEFAULT_BOUNDARY_TOL};
use harvest_core::yields::DEFAULT_FRONTIER_TOL;
use harvest_core::{
    basin_scan, classify, grid, guaranteed_sustainable_effort, iterate, msy_rt_bound, optimal_effort, oracle_stability,
    positive_equilibrium, stability_region_sweep, sufficient_stable, sustainability_frontier, transitions,
    BasinOutcome, EffortRule, EmpiricalVerdict, InitialData, ModelParams, PostHarvestSeries, StabilityClass,
    StockParams, StoppingRule, SurvivalRule,
};
use proptest::prelude::*;

#[test]
fn msy_bound_matches_definition() {
    for k in 2..=60 {
        let kf = k as f64;
        let direct = -2.0 * (1.0 - 2.0 * (kf * PI / (2.0 * kf + 1.0)).cos()).ln();
        assert_relative_eq!(msy_rt_bound(k), direct, max_relative = 1e-9);
    }
}

#[test]
fn msy_bound_values() {
    assert_relative_eq!(msy_rt_bound(3), 1.1777252115233598, max_relative = 1e-12);
    assert_relative_eq!(msy_rt_bound(5), 0.6699098709404254, max_relative = 1e-12);
    assert!(msy_rt_bound(1).is_infinite() && msy_rt_bound(0).is_infinite());
}

#[test]
fn optimal_effort_is_sharp_marginal_at_msy_bound() {
    // At rT = f(k) and E = E_opt the sharp test sits exactly on its boundary.
    for k in 2..=8 {
        let rt = msy_rt_bound(k);
        let p = ModelParams::new(rt, 1.0, 1.0, optimal_effort(rt, 1.0), k).unwrap();
        let v = classify(&p, 0.0);
        assert!(v.margin.abs() < 1e-9, "k={k} margin {}", v.margin);
        let below = ModelParams::new(rt * 0.99, 1.0, 1.0, optimal_effort(rt * 0.99, 1.0), k).unwrap();
        assert_eq!(classify(&below, DEFAULT_BOUNDARY_TOL).class, StabilityClass::Stable);
        let above = ModelParams::new(rt * 1.01, 1.0, 1.0, optimal_effort(rt * 1.01, 1.0), k).unwrap();
        assert_eq!(classify(&above, DEFAULT_BOUNDARY_TOL).class, StabilityClass::Unstable);
    }
}

#[test]
fn sweep_transitions_bracket_bounds() {
    let rts = grid(1.90, 1.95, 0.01).unwrap();
    let t = transitions(&stability_region_sweep(&[2], &rts, EffortRule::Optimal).unwrap());
    assert_eq!(t.len(), 1);
    assert!((t[0].0.rt - 1.92).abs() < 1e-9 && (t[0].1.rt - 1.93).abs() < 1e-9);

    let rts = grid(0.1, 3.0, 0.01).unwrap();
    let rows = stability_region_sweep(&[1, 3, 5], &rts, EffortRule::Optimal).unwrap();
    assert!(rows
        .iter()
        .filter(|r| r.k == 1)
        .all(|r| r.verdict == StabilityClass::Stable));
    for (a, b) in transitions(&rows) {
        let f = msy_rt_bound(a.k);
        assert!(a.rt < f && f < b.rt, "k={} [{}, {}] vs {f}", a.k, a.rt, b.rt);
    }
}

#[test]
fn frontier_is_absent_below_bound() {
    let s = StockParams::new(1.5, 1.0, 1.0, 2).unwrap();
    assert_eq!(sustainability_frontier(&s, DEFAULT_FRONTIER_TOL).unwrap(), None);
    let s = StockParams::new(5.0, 1.0, 1.0, 1).unwrap();
    assert_eq!(sustainability_frontier(&s, DEFAULT_FRONTIER_TOL).unwrap(), None);
}

#[test]
fn orbit_is_deterministic() {
    let p = ModelParams::new(1.3, 200.0, 1.0, 0.45, 3).unwrap();
    let init = InitialData::new(50.0, vec![80.0, 20.0, 150.0]).unwrap();
    let a = iterate(&p, &init, &StoppingRule::default()).unwrap();
    let b = iterate(&p, &init, &StoppingRule::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn basin_scan_is_consistent_with_direct_simulation() {
    let p = ModelParams::new(1.3747, 307.1609, 1.0, 0.4971, 1).unwrap();
    let rule = SurvivalRule {
        iterations: 2_000,
        ..SurvivalRule::default()
    };
    let scan = basin_scan(&p, &rule, 100, 99).unwrap();
    let x_star = positive_equilibrium(&p).unwrap();
    for s in &scan.samples {
        let values: Vec<f64> = PostHarvestSeries::new(&p, &s.initial).unwrap().take(2_001).collect();
        let went_extinct = values.iter().any(|&x| x < rule.extinction_threshold);
        assert_eq!(s.outcome == BasinOutcome::Extinct, went_extinct);
        if s.outcome == BasinOutcome::Survived {
            assert!((values[2_000] - x_star).abs() <= 10.0);
        }
    }
}

fn effort_and_rt() -> impl Strategy<Value = (f64, f64)> {
    (0.01f64..0.95, 0.02f64..4.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn sufficient_test_implies_sharp((e, rt) in effort_and_rt(), k in 0usize..10) {
        let p = ModelParams::new(rt, 1.0, 1.0, e, k).unwrap();
        if sufficient_stable(&p) {
            prop_assert_eq!(classify(&p, 0.0).class, StabilityClass::Stable);
        }
    }

    #[test]
    fn guaranteed_effort_is_sustainable_for_all_delays(rt in 0.02f64..6.0, frac in 0.0f64..0.999, k in 0usize..12) {
        let e = guaranteed_sustainable_effort(rt, 1.0) * frac;
        prop_assume!(e > 1e-6);
        let p = ModelParams::new(rt, 1.0, 1.0, e, k).unwrap();
        prop_assert_eq!(classify(&p, 0.0).class, StabilityClass::Stable);
    }

    #[test]
    fn k1_explicit_and_sharp_agree((e, rt) in effort_and_rt()) {
        let p = ModelParams::new(rt, 1.0, 1.0, e, 1).unwrap();
        let a = classify_k1(&p, 0.0);
        let b = classify_sharp(&p, 0.0);
        prop_assume!(a.margin.abs() > 1e-9 && b.margin.abs() > 1e-9);
        prop_assert_eq!(a.class, b.class);
    }

    #[test]
    fn sustainability_is_downward_closed(rt in 0.1f64..5.0, k in 2usize..8) {
        let e_opt = optimal_effort(rt, 1.0);
        let classes: Vec<bool> = (1..=60)
            .map(|i| {
                let p = ModelParams::new(rt, 1.0, 1.0, e_opt * i as f64 / 60.0, k).unwrap();
                classify(&p, 0.0).class == StabilityClass::Stable
            })
            .collect();
        let first = classes.iter().position(|s| !s).unwrap_or(classes.len());
        prop_assert!(classes[first..].iter().all(|s| !s));
    }

    #[test]
    fn oracle_agrees_away_from_boundary((e, rt) in effort_and_rt(), k in 1usize..6) {
        let p = ModelParams::new(rt, 1.0, 1.0, e, k).unwrap();
        let v = classify(&p, 0.0);
        prop_assume!(v.class != StabilityClass::NoPositiveEquilibrium && v.margin.abs() > 0.02);
        let empirical = oracle_stability(&p, 1e-6, 20_000).unwrap();
        prop_assume!(empirical != EmpiricalVerdict::Inconclusive);
        prop_assert_eq!(empirical == EmpiricalVerdict::Stable, v.class == StabilityClass::Stable);
    }

    #[test]
    fn frontier_lies_between_bounds(rt in 0.5f64..6.0, k in 2usize..7) {
        let s = StockParams::new(rt, 1.0, 1.0, k).unwrap();
        match sustainability_frontier(&s, DEFAULT_FRONTIER_TOL).unwrap() {
            None => prop_assert!(rt < msy_rt_bound(k)),
            Some(fp) => {
                prop_assert!(rt >= msy_rt_bound(k));
                prop_assert!(guaranteed_sustainable_effort(rt, 1.0) < fp.effort);
                prop_assert!(fp.effort <= optimal_effort(rt, 1.0));
                prop_assert!(fp.residual < 1e-8);
            }
        }
    }
}
