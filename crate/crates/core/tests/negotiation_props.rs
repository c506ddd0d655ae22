//! Utility-function and protocol properties.

mod support;

use proptest::prelude::*;
use slabroker_core::negotiation::{
    global_utility, utility_cost, utility_gain, utility_gain_slope, AttributeUtility, Concession, MessageKind, Outcome,
    Party, Terms, UtilityParams,
};
use slabroker_core::qos::Direction;
use support::scenarios;

fn f(x: f64, a: f64, b: f64) -> f64 {
    utility_gain(x, a, b).unwrap()
}

fn g(y: f64, a: f64, b: f64) -> f64 {
    utility_cost(y, a, b).unwrap()
}

/// The availability / response-time profile of the worked example.
fn example_params() -> UtilityParams<f64> {
    UtilityParams::new(vec![
        AttributeUtility::new("availability", Direction::UtilityDriven, 0.99, 4.0, 0.7),
        AttributeUtility::new("response_time", Direction::CostDriven, 0.20, 2.0, 0.3),
    ])
    .unwrap()
}

fn terms(x: f64, y: f64) -> Terms<f64> {
    [("availability".to_string(), x), ("response_time".to_string(), y)].into()
}

#[test]
fn spot_values() {
    assert!((f(0.5, 0.99, 1.0) - 0.66555).abs() < 1e-5);
    assert!((g(0.5, 0.20, 2.0) - 0.714286).abs() < 1e-5);
    let p = example_params();
    assert!((global_utility(&terms(0.9, 0.3), &p).unwrap() - 0.82224).abs() < 1e-5);
}

#[test]
fn slope_matches_central_difference() {
    let h = 1e-5;
    let numeric = (f(0.5 + h, 0.99, 1.0) - f(0.5 - h, 0.99, 1.0)) / (2.0 * h);
    let analytic = utility_gain_slope(0.5, 0.99, 1.0).unwrap();
    assert!((numeric - analytic).abs() < 1e-6, "{numeric} vs {analytic}");
}

#[test]
fn surface_peaks_at_full_availability_and_zero_latency() {
    let p = example_params();
    let n = 101;
    let mut best = (f64::MIN, 0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let (x, y) = (i as f64 / (n - 1) as f64, j as f64 / (n - 1) as f64);
            let u = global_utility(&terms(x, y), &p).unwrap();
            assert!((0.0..=1.0).contains(&u));
            if u > best.0 {
                best = (u, x, y);
            }
        }
    }
    assert_eq!(best, (1.0, 1.0, 0.0));
}

#[test]
fn out_of_domain_levels_are_errors() {
    assert!(utility_gain(1.2, 0.5, 1.0).is_err());
    assert!(utility_cost(-0.1, 0.5, 1.0).is_err());
    assert!(utility_gain(0.5, -1.0, 1.0).is_err());
    assert!(utility_gain(f64::NAN, 0.5, 1.0).is_err());
}

#[test]
fn concession_example_agrees_in_round_four() {
    let seq: Vec<f64> = (0..4)
        .map(|k| {
            let t = (0.2 * k as f64).min(1.0);
            global_utility(&terms(0.5 + t * 0.5, 0.8 - t * 0.8), &example_params()).unwrap()
        })
        .collect();
    let first = seq.iter().position(|u| *u >= 0.65).unwrap();
    assert_eq!(first + 1, 4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn boundaries_are_exact(a in 0.0..=5.0f64, b in 1e-3..=8.0f64) {
        prop_assert_eq!(f(0.0, a, b), 0.0);
        prop_assert_eq!(f(1.0, a, b), 1.0);
        prop_assert_eq!(g(0.0, a, b), 1.0);
        prop_assert_eq!(g(1.0, a, b), 0.0);
    }

    #[test]
    fn strictly_monotone(x1 in 0.02..=0.97f64, gap in 1e-3..=0.5f64, a in 0.0..=5.0f64, b in 0.1..=6.0f64) {
        let x2 = (x1 + gap).min(0.99);
        prop_assert!(f(x1, a, b) < f(x2, a, b));
        prop_assert!(g(x1, a, b) > g(x2, a, b));
    }

    #[test]
    fn beta_ordering(x in 0.02..=0.98f64, a in 0.0..=5.0f64, b1 in 0.1..=4.0f64, db in 0.05..=4.0f64) {
        let b2 = b1 + db;
        prop_assert!(f(x, a, b1) > f(x, a, b2));
        prop_assert!(g(x, a, b1) < g(x, a, b2));
    }

    #[test]
    fn utilities_stay_in_unit_interval(x in 0.0..=1.0f64, a in 0.0..=10.0f64, b in 0.0..=10.0f64) {
        prop_assert!((0.0..=1.0).contains(&f(x, a, b)));
        prop_assert!((0.0..=1.0).contains(&g(x, a, b)));
    }

    #[test]
    fn global_utility_bounded(x in 0.0..=1.0f64, y in 0.0..=1.0f64) {
        let u = global_utility(&terms(x, y), &example_params()).unwrap();
        prop_assert!((0.0..=1.0).contains(&u));
        prop_assert_eq!(u == 1.0, x == 1.0 && y == 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn protocol_runs_are_well_formed(s in scenarios::scenario()) {
        let result = s.run("prop").unwrap();
        let m = s.session.max_rounds as usize;
        prop_assert!(result.transcript.len() <= 2 * m + 2);
        for pair in result.transcript.windows(2) {
            prop_assert_ne!(pair[0].message.from, pair[1].message.from);
        }
        prop_assert_eq!(result.transcript[0].message.from, Party::Broker);
        let reached = result.transcript.iter().any(|e| {
            e.message.kind == MessageKind::Proposal && e.utility.is_some_and(|u| u >= s.session.threshold)
        });
        prop_assert_eq!(result.outcome == Outcome::Agreement, reached);
        if result.outcome == Outcome::Agreement {
            prop_assert!(result.final_terms.is_some());
        } else {
            prop_assert_eq!(result.outcome, Outcome::MaxRoundsExceeded);
            prop_assert_eq!(result.rounds, s.session.max_rounds);
        }
    }

    #[test]
    fn no_concession_below_threshold_never_agrees(mut s in scenarios::scenario()) {
        s.session.concession = Concession::Constant;
        s.provider.strategy = Concession::Constant;
        s.provider.best_terms = s.provider.opening_terms.clone();
        let opening = global_utility(&s.provider.opening_terms, &s.params).unwrap();
        prop_assume!(opening < 0.999);
        if opening >= s.session.threshold {
            s.session.threshold = (opening + 1.0) / 2.0;
        }
        let result = s.run("still").unwrap();
        prop_assert_eq!(result.outcome, Outcome::MaxRoundsExceeded);
    }

    #[test]
    fn reachable_overlap_means_agreement(mut s in scenarios::scenario(), gamma in 0.2..=1.0f64) {
        let steps = (1.0 / gamma).ceil() as u32;
        s.session.max_rounds = s.session.max_rounds.max(steps + 1);
        let reachable = global_utility(&s.provider.best_terms, &s.params).unwrap();
        s.session.threshold = s.session.threshold.min(reachable);
        s.provider.strategy = Concession::linear(gamma);
        prop_assert_eq!(s.run("zone").unwrap().outcome, Outcome::Agreement);
    }

    #[test]
    fn provider_never_passes_its_ceiling(s in scenarios::scenario(), round in 0u32..30) {
        let terms = s.provider.concession_terms(round);
        for (name, v) in &terms {
            let best = s.provider.best_terms[name];
            match s.provider.directions[name] {
                Direction::CostDriven => prop_assert!(*v >= best - 1e-12),
                Direction::UtilityDriven => prop_assert!(*v <= best + 1e-12),
            }
        }
    }

    #[test]
    fn positive_gamma_converges(s in scenarios::scenario(), gamma in 0.05..=1.0f64) {
        let mut agent = s.provider;
        agent.strategy = Concession::linear(gamma);
        let k = (1.0 / gamma).ceil() as u32;
        let t = agent.concession_terms(k);
        for (name, v) in &t {
            prop_assert!((v - agent.best_terms[name]).abs() < 1e-12);
        }
    }
}
