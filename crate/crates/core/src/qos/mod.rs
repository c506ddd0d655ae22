//! QoS offer normalization and provider ranking.
//!
//! Raw offers are mapped into `[0,1]` per attribute using bounds taken over
//! every offer *and* the consumer requirement, so the requirement can lie
//! outside the range the providers span. Cost-driven attributes are flipped
//! so that `1` is always the most desirable value.

mod dataset;
mod normalize;
mod rank;
mod topsis;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{weights_sum_to_one, Scalar};

pub use dataset::{read_offers_csv, read_offers_json, write_offers_csv, DatasetError};
pub use normalize::{normalize, Bounds, NormalizedMatrix};
pub use rank::{aggregate_utility, satisfaction_flags, select_best};
pub use topsis::{topsis_rank, topsis_rank_with, TopsisNormalization};

/// Whether consumers want an attribute maximized or minimized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Higher is better (availability, reliability, throughput).
    UtilityDriven,
    /// Lower is better (response time, cost).
    CostDriven,
}

/// Provider identifier.
///
/// Ordering is "natural": identifiers that are plain integers compare
/// numerically and sort before any non-numeric identifier, so `"9" < "12"`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize, JsonSchema)]
#[serde(transparent)]
pub struct ProviderId(String);

impl ProviderId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn numeric(&self) -> Option<u128> {
        if self.0.is_empty() || !self.0.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        self.0.parse().ok()
    }
}

impl Ord for ProviderId {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.numeric(), other.numeric()) {
            (Some(a), Some(b)) => a.cmp(&b).then_with(|| self.0.cmp(&other.0)),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => self.0.cmp(&other.0),
        }
    }
}

impl PartialOrd for ProviderId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ProviderId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ProviderId {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

impl From<String> for ProviderId {
    fn from(s: String) -> Self {
        Self(s)
    }
}

impl From<u32> for ProviderId {
    fn from(n: u32) -> Self {
        Self(n.to_string())
    }
}

/// One negotiable quality attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct QosAttributeSpec<T: Scalar> {
    pub name: String,
    pub direction: Direction,
    #[serde(default)]
    pub unit: String,
    pub weight: T,
}

impl<T: Scalar> QosAttributeSpec<T> {
    pub fn new(name: impl Into<String>, direction: Direction, unit: impl Into<String>, weight: T) -> Self {
        Self { name: name.into(), direction, unit: unit.into(), weight }
    }
}

/// A provider's advertised QoS vector, in raw units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Offer<T: Scalar> {
    pub provider_id: ProviderId,
    pub values: BTreeMap<String, T>,
}

impl<T: Scalar> Offer<T> {
    pub fn new(provider_id: impl Into<ProviderId>, values: impl IntoIterator<Item = (String, T)>) -> Self {
        Self { provider_id: provider_id.into(), values: values.into_iter().collect() }
    }
}

/// The consumer's requested level per attribute, in raw units.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Requirement<T: Scalar> {
    pub values: BTreeMap<String, T>,
}

impl<T: Scalar> Requirement<T> {
    pub fn new(values: impl IntoIterator<Item = (String, T)>) -> Self {
        Self { values: values.into_iter().collect() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankingMethod {
    WeightedUtility,
    Topsis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct RankEntry<T: Scalar> {
    pub provider_id: ProviderId,
    /// Fraction in `[0,1]`.
    pub score: T,
    /// 1-based.
    pub rank: usize,
}

/// Providers ordered by descending score; ties go to the smaller id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct RankingTable<T: Scalar> {
    pub method: RankingMethod,
    pub entries: Vec<RankEntry<T>>,
}

impl<T: Scalar> RankingTable<T> {
    pub(crate) fn from_scores(method: RankingMethod, scores: Vec<(ProviderId, T)>) -> Self {
        let mut scores = scores;
        scores.sort_by(|(ida, a), (idb, b)| {
            b.partial_cmp(a).unwrap_or(Ordering::Equal).then_with(|| ida.cmp(idb))
        });
        let entries = scores
            .into_iter()
            .enumerate()
            .map(|(i, (provider_id, score))| RankEntry { provider_id, score, rank: i + 1 })
            .collect();
        Self { method, entries }
    }

    pub fn best(&self) -> Option<&RankEntry<T>> {
        self.entries.first()
    }

    pub fn score_of(&self, id: &ProviderId) -> Option<T> {
        self.entries.iter().find(|e| &e.provider_id == id).map(|e| e.score)
    }

    pub fn rank_of(&self, id: &ProviderId) -> Option<usize> {
        self.entries.iter().find(|e| &e.provider_id == id).map(|e| e.rank)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QosError {
    #[error("no offers to rank")]
    EmptyOfferSet,
    #[error("{owner} does not match the attribute list: {detail}")]
    AttributeMismatch { owner: String, detail: String },
    #[error("{owner} has a non-finite value for `{attribute}`")]
    NonFiniteValue { owner: String, attribute: String },
    #[error("attribute weights sum to {sum}, expected 1")]
    WeightSumError { sum: f64 },
    #[error("weight for `{attribute}` is {weight}, expected a value in [0,1]")]
    WeightOutOfRange { attribute: String, weight: f64 },
    #[error("attribute `{0}` is listed twice")]
    DuplicateAttribute(String),
    #[error("TOPSIS needs at least two offers, got {0}")]
    TooFewOffers(usize),
    #[error("column `{0}` has zero norm")]
    DegenerateColumn(String),
}

/// Checks the structural invariants of an attribute list: unique names,
/// weights in `[0,1]` summing to one.
pub fn validate_specs<T: Scalar>(specs: &[QosAttributeSpec<T>]) -> Result<(), QosError> {
    check_names(specs)?;
    for spec in specs {
        let w = spec.weight.as_f64();
        if !(0.0..=1.0).contains(&w) {
            return Err(QosError::WeightOutOfRange { attribute: spec.name.clone(), weight: w });
        }
    }
    weights_sum_to_one(specs.iter().map(|s| s.weight))
        .map_err(|sum| QosError::WeightSumError { sum: sum.as_f64() })
}

pub(crate) fn check_names<T: Scalar>(specs: &[QosAttributeSpec<T>]) -> Result<(), QosError> {
    let mut seen = std::collections::BTreeSet::new();
    for spec in specs {
        if !seen.insert(spec.name.as_str()) {
            return Err(QosError::DuplicateAttribute(spec.name.clone()));
        }
    }
    Ok(())
}

/// Verifies that `values` covers exactly the attributes in `specs` with
/// finite numbers.
pub(crate) fn check_coverage<T: Scalar>(
    owner: &str,
    values: &BTreeMap<String, T>,
    specs: &[QosAttributeSpec<T>],
) -> Result<(), QosError> {
    for spec in specs {
        match values.get(&spec.name) {
            None => {
                return Err(QosError::AttributeMismatch {
                    owner: owner.to_owned(),
                    detail: format!("missing `{}`", spec.name),
                })
            }
            Some(v) if !v.is_finite() => {
                return Err(QosError::NonFiniteValue { owner: owner.to_owned(), attribute: spec.name.clone() })
            }
            Some(_) => {}
        }
    }
    if let Some(extra) = values.keys().find(|k| !specs.iter().any(|s| &s.name == *k)) {
        return Err(QosError::AttributeMismatch {
            owner: owner.to_owned(),
            detail: format!("unexpected `{extra}`"),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn provider_ids_sort_naturally() {
        let mut ids: Vec<ProviderId> = ["12", "9", "b", "a", "100", "09"].iter().map(|s| ProviderId::from(*s)).collect();
        ids.sort();
        let got: Vec<&str> = ids.iter().map(ProviderId::as_str).collect();
        assert_eq!(got, ["09", "9", "12", "100", "a", "b"]);
    }

    #[test]
    fn spec_validation() {
        let ok = vec![
            QosAttributeSpec::new("a", Direction::UtilityDriven, "", 0.4),
            QosAttributeSpec::new("b", Direction::CostDriven, "", 0.6),
        ];
        assert!(validate_specs(&ok).is_ok());

        let dup = vec![
            QosAttributeSpec::new("a", Direction::UtilityDriven, "", 0.5),
            QosAttributeSpec::new("a", Direction::CostDriven, "", 0.5),
        ];
        assert_eq!(validate_specs(&dup), Err(QosError::DuplicateAttribute("a".into())));

        let bad_sum = vec![QosAttributeSpec::new("a", Direction::UtilityDriven, "", 0.9)];
        assert!(matches!(validate_specs(&bad_sum), Err(QosError::WeightSumError { .. })));

        let out_of_range = vec![
            QosAttributeSpec::new("a", Direction::UtilityDriven, "", 1.5),
            QosAttributeSpec::new("b", Direction::UtilityDriven, "", -0.5),
        ];
        assert!(matches!(validate_specs(&out_of_range), Err(QosError::WeightOutOfRange { .. })));
    }

    #[test]
    fn ranking_ties_break_on_smaller_id() {
        let table = RankingTable::from_scores(
            RankingMethod::WeightedUtility,
            vec![("12".into(), 0.5), ("9".into(), 0.5), ("3".into(), 0.7)],
        );
        let order: Vec<&str> = table.entries.iter().map(|e| e.provider_id.as_str()).collect();
        assert_eq!(order, ["3", "9", "12"]);
        assert_eq!(table.entries.iter().map(|e| e.rank).collect::<Vec<_>>(), [1, 2, 3]);
    }
}
