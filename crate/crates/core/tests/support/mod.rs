//! Test-only helpers shared by the integration tests.
//!
//! The oracle here recomputes the weighted-utility ranking the way a
//! spreadsheet would: fixed columns, plain arrays, no crate types. It must
//! stay independent of `slabroker_core::qos`.
#![allow(dead_code)]

pub const OFFERS_CSV: &str = include_str!("../../fixtures/offers.csv");
pub const PUBLISHED_UTILITY_CSV: &str = include_str!("../../fixtures/published_utility.csv");
pub const PUBLISHED_CLOSENESS_CSV: &str = include_str!("../../fixtures/published_closeness.csv");
pub const PM_REQUEST_XML: &str = include_str!("../../fixtures/pm_request.xml");
pub const REFERENCE_REQUEST_JSON: &str = include_str!("../../fixtures/reference_request.json");

/// Column order of the offers fixture.
pub const COLUMNS: [&str; 4] = ["Availability", "Reliability", "Cost", "Response-time"];
pub const IS_COST: [bool; 4] = [false, false, true, true];
/// Consumer requirement in column order.
pub const REQUIREMENT: [f64; 4] = [0.9997, 0.9996, 25.0, 6.0];
/// Attribute weights in column order.
pub const WEIGHTS: [f64; 4] = [0.305, 0.267, 0.197, 0.231];

pub fn offer_rows() -> Vec<(u32, [f64; 4])> {
    OFFERS_CSV
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let cells: Vec<&str> = l.split(',').collect();
            let mut row = [0.0; 4];
            for (slot, cell) in row.iter_mut().zip(&cells[1..]) {
                *slot = cell.trim().parse().unwrap();
            }
            (cells[0].trim().parse().unwrap(), row)
        })
        .collect()
}

/// `(provider_id, value in percent)` rows of a published table.
pub fn published(csv: &str) -> Vec<(u32, f64)> {
    csv.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let cells: Vec<&str> = l.split(',').collect();
            (cells[0].parse().unwrap(), cells[1].parse().unwrap())
        })
        .collect()
}

/// Normalized cell for column `j` of one row, extremes widened by the
/// requirement; `1.0` when the column is constant.
pub fn oracle_cell(rows: &[[f64; 4]], requirement: &[f64; 4], is_cost: &[bool; 4], j: usize, value: f64) -> f64 {
    let mut hi = requirement[j];
    let mut lo = requirement[j];
    for row in rows {
        if row[j] > hi {
            hi = row[j];
        }
        if row[j] < lo {
            lo = row[j];
        }
    }
    if hi == lo {
        return 1.0;
    }
    if is_cost[j] {
        (hi - value) / (hi - lo)
    } else {
        (value - lo) / (hi - lo)
    }
}

/// Per-row `(Σ wⱼ·qⱼ, per-column weighted terms)`.
pub fn oracle_utilities(
    rows: &[[f64; 4]],
    requirement: &[f64; 4],
    weights: &[f64; 4],
    is_cost: &[bool; 4],
) -> Vec<(f64, [f64; 4])> {
    rows.iter()
        .map(|row| {
            let mut terms = [0.0; 4];
            let mut total = 0.0;
            for j in 0..4 {
                terms[j] = weights[j] * oracle_cell(rows, requirement, is_cost, j, row[j]);
                total += terms[j];
            }
            (total, terms)
        })
        .collect()
}

/// Spearman rank correlation of two equally long score lists.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&i, &j| v[j].partial_cmp(&v[i]).unwrap());
        let mut r = vec![0.0; v.len()];
        let mut k = 0;
        while k < idx.len() {
            let mut end = k;
            while end + 1 < idx.len() && v[idx[end + 1]] == v[idx[k]] {
                end += 1;
            }
            let avg = (k + end) as f64 / 2.0 + 1.0;
            for &i in &idx[k..=end] {
                r[i] = avg;
            }
            k = end + 1;
        }
        r
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - mean) * (y - mean)).sum();
    let va: f64 = ra.iter().map(|x| (x - mean).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mean).powi(2)).sum();
    cov / (va * vb).sqrt()
}

pub mod scenarios {
    //! Random bilateral negotiation scenarios.
    use std::collections::BTreeMap;

    use proptest::prelude::*;
    use slabroker_core::negotiation::{AttributeUtility, Concession, SessionConfig, UtilityParams};
    use slabroker_core::provider::{ProviderAgent, Scenario};
    use slabroker_core::qos::{Direction, Offer};

    const NAMES: [&str; 3] = ["a", "b", "c"];

    pub fn concession() -> impl Strategy<Value = Concession<f64>> {
        prop_oneof![
            Just(Concession::Constant),
            (0.0..=0.6f64).prop_map(Concession::linear),
            (0.05..=0.6f64, 0.5..=3.0f64).prop_map(|(step, exponent)| Concession::Boulware { step, exponent }),
        ]
    }

    pub fn scenario() -> impl Strategy<Value = Scenario<f64>> {
        (1usize..=3)
            .prop_flat_map(|n| {
                (
                    prop::collection::vec((any::<bool>(), 0.0..=2.0f64, 0.25..=5.0f64, 1u32..=20), n),
                    prop::collection::vec((0.0..=1.0f64, 0.0..=1.0f64), n),
                    0.2..=0.95f64,
                    1u32..=12,
                    concession(),
                    concession(),
                    any::<bool>(),
                )
            })
            .prop_map(|(attrs, levels, threshold, max_rounds, broker, provider, accept_counters)| {
                let total: u32 = attrs.iter().map(|a| a.3).sum();
                let mut utilities: Vec<AttributeUtility<f64>> = attrs
                    .iter()
                    .enumerate()
                    .map(|(i, (cost, alpha, beta, w))| {
                        let direction = if *cost { Direction::CostDriven } else { Direction::UtilityDriven };
                        AttributeUtility::new(NAMES[i], direction, *alpha, *beta, f64::from(*w) / f64::from(total))
                    })
                    .collect();
                let rest: f64 = utilities[1..].iter().map(|u| u.weight).sum();
                utilities[0].weight = 1.0 - rest;
                let directions: BTreeMap<String, Direction> =
                    utilities.iter().map(|u| (u.name.clone(), u.direction)).collect();
                let opening = levels.iter().enumerate().map(|(i, l)| (NAMES[i].to_string(), l.0)).collect();
                let best = levels.iter().enumerate().map(|(i, l)| (NAMES[i].to_string(), l.1)).collect();
                Scenario {
                    params: UtilityParams::new(utilities).unwrap(),
                    session: SessionConfig { threshold, max_rounds, concession: broker, ideal: None },
                    provider: ProviderAgent {
                        provider_id: "p".into(),
                        advertised_offer: Offer::new("p", []),
                        directions,
                        opening_terms: opening,
                        best_terms: best,
                        strategy: provider,
                        template_bounds: BTreeMap::new(),
                        accept_counters,
                    },
                    request_terms: None,
                }
            })
    }
}
