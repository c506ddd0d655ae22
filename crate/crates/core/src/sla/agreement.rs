use std::collections::BTreeMap;

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};

use super::{Comparator, DirectionRegistry, Parties, Penalty, Price, QosRequirementEntry, Sla, SlaError, SlaRequestDoc, Slo, ValidityPeriod};
use crate::negotiation::{NegotiationSession, Outcome};
use crate::qos::{Direction, ProviderId, QosAttributeSpec, Requirement};
use crate::scalar::Scalar;

/// How a normalized level relates to the raw `[min, max]` range of a
/// request entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermScale {
    /// `1` is the most desirable end for either direction (the ranking
    /// convention): cost-driven attributes are flipped.
    Satisfaction,
    /// `0` is the low end of the raw range for either direction (the
    /// negotiation convention, where a cost-driven level near `0` is best).
    Position,
}

fn flips(direction: Direction, scale: TermScale) -> bool {
    direction == Direction::CostDriven && scale == TermScale::Satisfaction
}

/// Maps a raw value into `[0,1]` over the entry's `[min, max]` range,
/// clamping values outside it. A zero-width range maps to the most
/// desirable level.
pub fn normalize_value(raw: f64, entry: &QosRequirementEntry, direction: Direction, scale: TermScale) -> f64 {
    let range = entry.max_value - entry.min_value;
    let position = if range > 0.0 {
        ((raw - entry.min_value) / range).clamp(0.0, 1.0)
    } else if direction == Direction::UtilityDriven {
        1.0
    } else {
        0.0
    };
    if flips(direction, scale) {
        1.0 - position
    } else {
        position
    }
}

fn denormalize_value(level: f64, entry: &QosRequirementEntry, direction: Direction, scale: TermScale) -> f64 {
    let range = entry.max_value - entry.min_value;
    if flips(direction, scale) {
        entry.max_value - level * range
    } else {
        entry.min_value + level * range
    }
}

/// Converts satisfaction-scale levels back to raw units:
/// `min + t·(max−min)` for utility-driven, `max − t·(max−min)` for
/// cost-driven attributes.
pub fn denormalize_terms(
    terms: &BTreeMap<String, f64>,
    doc: &SlaRequestDoc,
    registry: &DirectionRegistry,
) -> Result<BTreeMap<String, f64>, SlaError> {
    denormalize_terms_with(terms, doc, registry, TermScale::Satisfaction)
}

pub fn denormalize_terms_with(
    terms: &BTreeMap<String, f64>,
    doc: &SlaRequestDoc,
    registry: &DirectionRegistry,
    scale: TermScale,
) -> Result<BTreeMap<String, f64>, SlaError> {
    terms
        .iter()
        .map(|(name, level)| {
            let entry = doc
                .entry(name)
                .ok_or_else(|| SlaError::AttributeMismatch(format!("request has no entry `{name}`")))?;
            if !(0.0..=1.0).contains(level) {
                return Err(SlaError::Range { attribute: name.clone(), detail: format!("level {level} outside [0,1]") });
            }
            let direction = registry.direction_of(name)?;
            Ok((name.clone(), denormalize_value(*level, entry, direction, scale)))
        })
        .collect()
}

/// Bridges a request document to the ranking inputs: preferred values
/// become the requirement vector, entry weights the attribute weights.
pub fn to_requirement<T: Scalar>(
    doc: &SlaRequestDoc,
    registry: &DirectionRegistry,
) -> Result<(Requirement<T>, Vec<QosAttributeSpec<T>>), SlaError> {
    doc.validate()?;
    let specs = doc
        .entries
        .iter()
        .map(|e| Ok(QosAttributeSpec::new(e.name.clone(), registry.direction_of(&e.name)?, e.unit.clone(), T::lit(e.weight))))
        .collect::<Result<Vec<_>, SlaError>>()?;
    let requirement = Requirement::new(doc.entries.iter().map(|e| (e.name.clone(), T::lit(e.preferred_value))));
    Ok((requirement, specs))
}

/// Defaults filled into agreements where negotiation says nothing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgreementDefaults {
    pub percentile: f64,
    pub window_secs: u64,
    pub validity_days: i64,
    pub scope: String,
    pub assessment_method: String,
    pub exclusions: Vec<String>,
    pub penalty_description: String,
    pub penalty_amount: f64,
    /// Used when no cost attribute was negotiated.
    pub price: f64,
    pub currency: String,
}

impl Default for AgreementDefaults {
    fn default() -> Self {
        Self {
            percentile: 95.0,
            window_secs: 30 * 24 * 3600,
            validity_days: 365,
            scope: "service delivery as described in the request".into(),
            assessment_method: "third-party monitoring feeds evaluated per SLO window".into(),
            exclusions: vec!["scheduled maintenance announced in advance".into()],
            penalty_description: "service credit for a missed objective".into(),
            penalty_amount: 0.0,
            price: 0.0,
            currency: "USD".into(),
        }
    }
}

/// Turns a concluded negotiation into an agreement with one SLO per
/// negotiated attribute.
///
/// Session terms are on the [`TermScale::Position`] scale over the
/// request's ranges.
pub fn build_agreement(
    session: &NegotiationSession<f64>,
    doc: &SlaRequestDoc,
    provider_id: ProviderId,
    registry: &DirectionRegistry,
    defaults: &AgreementDefaults,
    now: DateTime<Utc>,
) -> Result<Sla, SlaError> {
    if session.outcome() != Some(Outcome::Agreement) {
        return Err(SlaError::NotAgreed);
    }
    let terms = session.agreed_terms().ok_or(SlaError::NotAgreed)?;
    let raw = denormalize_terms_with(terms, doc, registry, TermScale::Position)?;

    let mut slos = Vec::with_capacity(raw.len());
    let mut price = defaults.price;
    for entry in doc.entries.iter().filter(|e| raw.contains_key(&e.name)) {
        let direction = registry.direction_of(&entry.name)?;
        let target = raw[&entry.name];
        if registry.is_cost(&entry.name) {
            price = target;
        }
        slos.push(Slo {
            indicator: entry.name.clone(),
            comparator: Comparator::for_direction(direction),
            target,
            unit: entry.unit.clone(),
            percentile: defaults.percentile,
            window_secs: defaults.window_secs,
        });
    }
    let penalties = (0..slos.len())
        .map(|slo_index| Penalty { slo_index, description: defaults.penalty_description.clone(), amount: defaults.penalty_amount })
        .collect();

    let sla = Sla {
        id: format!("sla-{}", session.session_id()),
        service_name: doc.service_name.clone(),
        parties: Parties { consumer_id: doc.consumer_id.clone().unwrap_or_else(|| "anonymous".into()), provider_id },
        activation_time: now,
        scope: defaults.scope.clone(),
        slos,
        penalties,
        exclusions: defaults.exclusions.clone(),
        validity: ValidityPeriod { start: now, end: now + Duration::days(defaults.validity_days.max(1)) },
        cost: Price { amount: price, currency: defaults.currency.clone() },
        assessment_method: defaults.assessment_method.clone(),
    };
    sla.validate()?;
    Ok(sla)
}
