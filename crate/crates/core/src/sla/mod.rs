//! SLA documents: quality-requirement requests, agreements and their SLOs.
//!
//! Requests arrive as XML (`service/QoSAttributes/QoSAttribute`) or JSON;
//! JSON is the canonical storage format for both requests and agreements.

mod agreement;
mod xml;

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qos::{Direction, ProviderId};

pub use agreement::{
    build_agreement, denormalize_terms, denormalize_terms_with, normalize_value, to_requirement, AgreementDefaults,
    TermScale,
};
pub use xml::{parse_sla_request_xml, write_sla_request_xml};

/// One requested quality attribute with its acceptable range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub struct QosRequirementEntry {
    pub name: String,
    pub min_value: f64,
    pub max_value: f64,
    pub preferred_value: f64,
    #[serde(default)]
    pub unit: String,
    pub weight: f64,
}

/// The consumer's quality requirements for a service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct SlaRequestDoc {
    pub service_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub consumer_id: Option<String>,
    pub entries: Vec<QosRequirementEntry>,
}

impl SlaRequestDoc {
    /// Checks per-entry ranges, unique names and that weights sum to one.
    pub fn validate(&self) -> Result<(), SlaError> {
        if self.entries.is_empty() {
            return Err(SlaError::Schema("request lists no QoS attributes".into()));
        }
        let mut names = BTreeSet::new();
        for e in &self.entries {
            if !names.insert(e.name.as_str()) {
                return Err(SlaError::DuplicateAttribute(e.name.clone()));
            }
            let all_finite = [e.min_value, e.max_value, e.preferred_value, e.weight].iter().all(|v| v.is_finite());
            if !all_finite {
                return Err(SlaError::Range { attribute: e.name.clone(), detail: "non-finite value".into() });
            }
            if e.min_value > e.max_value {
                return Err(SlaError::Range {
                    attribute: e.name.clone(),
                    detail: format!("min-value {} exceeds max-value {}", e.min_value, e.max_value),
                });
            }
            if e.preferred_value < e.min_value || e.preferred_value > e.max_value {
                return Err(SlaError::Range {
                    attribute: e.name.clone(),
                    detail: format!("preferred-value {} outside [{}, {}]", e.preferred_value, e.min_value, e.max_value),
                });
            }
            if !(0.0..=1.0).contains(&e.weight) {
                return Err(SlaError::Range { attribute: e.name.clone(), detail: format!("weight {} outside [0,1]", e.weight) });
            }
        }
        let sum: f64 = self.entries.iter().map(|e| e.weight).sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(SlaError::WeightSum { sum });
        }
        Ok(())
    }

    pub fn entry(&self, name: &str) -> Option<&QosRequirementEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

/// Attribute-name → direction lookup.
///
/// Ships with availability, reliability and throughput (utility-driven) and
/// response time and cost (cost-driven). Anything else must be configured
/// explicitly. Names match case-insensitively, treating `_`, `-` and spaces
/// alike.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DirectionRegistry {
    #[serde(default)]
    overrides: BTreeMap<String, Direction>,
}

impl DirectionRegistry {
    fn key(name: &str) -> String {
        name.trim()
            .chars()
            .map(|c| if c == '_' || c == ' ' { '-' } else { c.to_ascii_lowercase() })
            .collect()
    }

    pub fn with(mut self, name: &str, direction: Direction) -> Self {
        self.insert(name, direction);
        self
    }

    pub fn insert(&mut self, name: &str, direction: Direction) {
        self.overrides.insert(Self::key(name), direction);
    }

    pub fn lookup(&self, name: &str) -> Option<Direction> {
        let key = Self::key(name);
        if let Some(d) = self.overrides.get(&key) {
            return Some(*d);
        }
        match key.as_str() {
            "availability" | "reliability" | "throughput" => Some(Direction::UtilityDriven),
            "response-time" | "cost" => Some(Direction::CostDriven),
            _ => None,
        }
    }

    pub fn direction_of(&self, name: &str) -> Result<Direction, SlaError> {
        self.lookup(name).ok_or_else(|| SlaError::UnknownAttributeDirection(name.to_owned()))
    }

    pub(crate) fn is_cost(&self, name: &str) -> bool {
        Self::key(name) == "cost"
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub enum Comparator {
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "<=")]
    AtMost,
}

impl Comparator {
    pub fn holds(self, value: f64, target: f64) -> bool {
        match self {
            Comparator::AtLeast => value >= target,
            Comparator::AtMost => value <= target,
        }
    }

    pub fn for_direction(direction: Direction) -> Self {
        match direction {
            Direction::UtilityDriven => Comparator::AtLeast,
            Direction::CostDriven => Comparator::AtMost,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::AtLeast => ">=",
            Comparator::AtMost => "<=",
        }
    }
}

/// A testable objective: `percentile`% of samples over `window_secs` must
/// satisfy `indicator comparator target`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct Slo {
    pub indicator: String,
    pub comparator: Comparator,
    pub target: f64,
    #[serde(default)]
    pub unit: String,
    pub percentile: f64,
    pub window_secs: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct Parties {
    pub consumer_id: String,
    pub provider_id: ProviderId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct Penalty {
    /// Index into [`Sla::slos`].
    pub slo_index: usize,
    pub description: String,
    pub amount: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct ValidityPeriod {
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct Price {
    pub amount: f64,
    pub currency: String,
}

/// A concluded agreement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct Sla {
    pub id: String,
    pub service_name: String,
    pub parties: Parties,
    pub activation_time: DateTime<Utc>,
    pub scope: String,
    pub slos: Vec<Slo>,
    pub penalties: Vec<Penalty>,
    #[serde(default)]
    pub exclusions: Vec<String>,
    pub validity: ValidityPeriod,
    pub cost: Price,
    pub assessment_method: String,
}

impl Sla {
    pub fn validate(&self) -> Result<(), SlaError> {
        if self.validity.start >= self.validity.end {
            return Err(SlaError::InvalidAgreement("validity period must end after it starts".into()));
        }
        for slo in &self.slos {
            if !(slo.percentile > 0.0 && slo.percentile <= 100.0) {
                return Err(SlaError::InvalidAgreement(format!("{}: percentile {} outside (0,100]", slo.indicator, slo.percentile)));
            }
            if slo.window_secs == 0 {
                return Err(SlaError::InvalidAgreement(format!("{}: empty SLO window", slo.indicator)));
            }
            if !slo.target.is_finite() {
                return Err(SlaError::InvalidAgreement(format!("{}: non-finite target", slo.indicator)));
            }
        }
        if let Some(p) = self.penalties.iter().find(|p| p.slo_index >= self.slos.len()) {
            return Err(SlaError::InvalidAgreement(format!("penalty references missing SLO #{}", p.slo_index)));
        }
        Ok(())
    }

    pub fn slo(&self, indicator: &str) -> Option<&Slo> {
        self.slos.iter().find(|s| s.indicator == indicator)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SlaError {
    #[error("XML syntax error: {0}")]
    XmlSyntax(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("`{attribute}`: {detail}")]
    Range { attribute: String, detail: String },
    #[error("entry weights sum to {sum}, expected 1")]
    WeightSum { sum: f64 },
    #[error("attribute `{0}` listed twice")]
    DuplicateAttribute(String),
    #[error("no direction known for attribute `{0}`; add it to the direction registry")]
    UnknownAttributeDirection(String),
    #[error("attribute mismatch: {0}")]
    AttributeMismatch(String),
    #[error("negotiation did not end in agreement")]
    NotAgreed,
    #[error("invalid agreement: {0}")]
    InvalidAgreement(String),
}
