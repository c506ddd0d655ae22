//! Ranking invariants over random offer sets.

use proptest::prelude::*;
use slabroker_core::qos::{
    aggregate_utility, normalize, select_best, topsis_rank, Direction, Offer, ProviderId, QosAttributeSpec, Requirement,
};

#[derive(Debug, Clone)]
struct Case {
    specs: Vec<QosAttributeSpec<f64>>,
    offers: Vec<Offer<f64>>,
    requirement: Requirement<f64>,
}

fn name(j: usize) -> String {
    format!("q{j}")
}

fn case(min_offers: usize, max_offers: usize, max_attrs: usize) -> impl Strategy<Value = Case> {
    (min_offers..=max_offers, 1..=max_attrs)
        .prop_flat_map(|(n, m)| {
            (
                prop::collection::vec((any::<bool>(), 1u32..=50), m),
                prop::collection::vec(prop::collection::vec(-100.0..100.0f64, m), n),
                prop::collection::vec(-100.0..100.0f64, m),
            )
        })
        .prop_map(|(attrs, rows, req)| {
            let total: u32 = attrs.iter().map(|a| a.1).sum();
            let mut specs: Vec<QosAttributeSpec<f64>> = attrs
                .iter()
                .enumerate()
                .map(|(j, (cost, w))| {
                    let dir = if *cost { Direction::CostDriven } else { Direction::UtilityDriven };
                    QosAttributeSpec::new(name(j), dir, "", f64::from(*w) / f64::from(total))
                })
                .collect();
            let rest: f64 = specs[1..].iter().map(|s| s.weight).sum();
            specs[0].weight = 1.0 - rest;
            let offers = rows
                .iter()
                .enumerate()
                .map(|(i, row)| Offer::new(i as u32 + 1, row.iter().enumerate().map(|(j, v)| (name(j), *v))))
                .collect();
            let requirement = Requirement::new(req.iter().enumerate().map(|(j, v)| (name(j), *v)));
            Case { specs, offers, requirement }
        })
}

fn utilities(c: &Case) -> Vec<(ProviderId, f64)> {
    let m = normalize(&c.offers, &c.requirement, &c.specs).unwrap();
    m.rows.iter().map(|(id, row)| (id.clone(), aggregate_utility(row, &c.specs).unwrap())).collect()
}

fn with_values(c: &Case, f: impl Fn(usize, f64) -> f64) -> Case {
    let mut out = c.clone();
    for o in &mut out.offers {
        for j in 0..c.specs.len() {
            let v = o.values.get_mut(&name(j)).unwrap();
            *v = f(j, *v);
        }
    }
    for (j, v) in out.requirement.values.values_mut().enumerate() {
        *v = f(j, *v);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn normalized_levels_in_unit_interval(c in case(1, 8, 5)) {
        let m = normalize(&c.offers, &c.requirement, &c.specs).unwrap();
        for (_, row) in &m.rows {
            prop_assert!(row.values().all(|q| (0.0..=1.0).contains(q)));
        }
        for (_, u) in utilities(&c) {
            prop_assert!((0.0..=1.0 + 1e-12).contains(&u));
        }
    }

    #[test]
    fn positive_affine_rescaling_changes_nothing(c in case(1, 8, 4), a in 0.01..50.0f64, b in -1e3..1e3f64) {
        let scaled = with_values(&c, |_, v| a * v + b);
        for ((id1, u1), (id2, u2)) in utilities(&c).iter().zip(utilities(&scaled)) {
            prop_assert_eq!(id1, &id2);
            prop_assert!((u1 - u2).abs() <= 1e-12, "{} vs {}", u1, u2);
        }
    }

    #[test]
    fn negating_a_column_and_flipping_its_direction_is_neutral(c in case(1, 8, 4), j in 0usize..4) {
        let j = j % c.specs.len();
        let mut flipped = with_values(&c, |k, v| if k == j { -v } else { v });
        flipped.specs[j].direction = match c.specs[j].direction {
            Direction::CostDriven => Direction::UtilityDriven,
            Direction::UtilityDriven => Direction::CostDriven,
        };
        for ((_, u1), (_, u2)) in utilities(&c).iter().zip(utilities(&flipped)) {
            prop_assert!((u1 - u2).abs() <= 1e-12);
        }
    }

    #[test]
    fn select_best_is_the_brute_force_argmax(c in case(1, 5, 3)) {
        let table = select_best(&c.offers, &c.requirement, &c.specs).unwrap();
        let mut all = utilities(&c);
        all.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
        prop_assert_eq!(&table.best().unwrap().provider_id, &all[0].0);
        prop_assert_eq!(table.entries.len(), c.offers.len());
        for (rank, e) in table.entries.iter().enumerate() {
            prop_assert_eq!(e.rank, rank + 1);
        }
    }

    #[test]
    fn improving_an_offer_within_fixed_bounds_never_lowers_it(c in case(1, 6, 4), j in 0usize..4, t in 0.0..=1.0f64) {
        let j = j % c.specs.len();
        let key = name(j);
        let col: Vec<f64> = c.offers.iter().map(|o| o.values[&key]).chain([c.requirement.values[&key]]).collect();
        let (lo, hi) = col.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
        let mut better = c.clone();
        let v = better.offers[0].values.get_mut(&key).unwrap();
        *v = match c.specs[j].direction {
            Direction::CostDriven => *v - t * (*v - lo),
            Direction::UtilityDriven => *v + t * (hi - *v),
        };
        let u0 = utilities(&c)[0].1;
        let u1 = utilities(&better)[0].1;
        prop_assert!(u1 >= u0 - 1e-15, "{} -> {}", u0, u1);
    }

    #[test]
    fn topsis_closeness_in_unit_interval(c in case(2, 8, 4)) {
        let t = topsis_rank(&c.offers, &c.requirement, &c.specs).unwrap();
        prop_assert!(t.entries.iter().all(|e| (0.0..=1.0).contains(&e.score)));
    }

    #[test]
    fn ideal_offer_stays_first_when_a_dominated_offer_joins(c in case(2, 6, 4), shrink in 0.0..1.0f64) {
        let mut c = c;
        // make provider 1 at least as good as everyone on every column
        for (j, spec) in c.specs.iter().enumerate() {
            let key = name(j);
            let col = c.offers.iter().map(|o| o.values[&key]).chain([c.requirement.values[&key]]);
            let best = match spec.direction {
                Direction::CostDriven => col.fold(f64::INFINITY, f64::min),
                Direction::UtilityDriven => col.fold(f64::NEG_INFINITY, f64::max),
            };
            *c.offers[0].values.get_mut(&key).unwrap() = best;
        }
        let before = topsis_rank(&c.offers, &c.requirement, &c.specs).unwrap();
        prop_assert_eq!(before.best().unwrap().provider_id.clone(), ProviderId::from(1));
        let worst: Vec<(String, f64)> = c.specs.iter().enumerate().map(|(j, spec)| {
            let key = name(j);
            let v = c.offers[1].values[&key];
            let step = 1.0 + shrink * 10.0;
            (key, if spec.direction == Direction::CostDriven { v + step } else { v - step })
        }).collect();
        c.offers.push(Offer::new(999, worst));
        let after = topsis_rank(&c.offers, &c.requirement, &c.specs).unwrap();
        prop_assert_eq!(after.best().unwrap().provider_id.clone(), ProviderId::from(1));
    }
}
