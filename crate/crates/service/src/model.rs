//! Records the broker persists and serves.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use slabroker_core::negotiation::{AttributeUtility, Concession, NegotiationResult, Outcome, SessionState, UtilityParams};
use slabroker_core::provider::TemplateBound;
use slabroker_core::qos::{Offer, ProviderId, RankingMethod, RankingTable};
use slabroker_core::sla::SlaRequestDoc;

/// A consumer's negotiation preferences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsumerProfile {
    #[serde(default)]
    pub consumer_id: String,
    /// Weight and sensitivity per attribute.
    pub attributes: Vec<AttributeUtility<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_rounds: Option<u32>,
    #[serde(default)]
    pub preferences: BTreeMap<String, String>,
}

impl ConsumerProfile {
    pub fn params(&self) -> Result<UtilityParams<f64>, String> {
        UtilityParams::new(self.attributes.clone()).map_err(|e| e.to_string())
    }

    pub fn validate(&self) -> Result<(), String> {
        self.params()?;
        match self.threshold {
            Some(t) if !(0.0..=1.0).contains(&t) => Err(format!("threshold {t} outside [0,1]")),
            _ if self.max_rounds == Some(0) => Err("max_rounds must be at least 1".into()),
            _ => Ok(()),
        }
    }
}

/// A registered SaaS provider and its simulated negotiation behaviour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderRecord {
    pub offer: Offer<f64>,
    /// Raw-unit levels the provider will concede to; its offer when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_offer: Option<BTreeMap<String, f64>>,
    #[serde(default)]
    pub template_bounds: BTreeMap<String, TemplateBound<f64>>,
    #[serde(default)]
    pub strategy: Concession<f64>,
    #[serde(default = "yes")]
    pub live: bool,
}

fn yes() -> bool {
    true
}

impl ProviderRecord {
    pub fn id(&self) -> &ProviderId {
        &self.offer.provider_id
    }
}

/// One row of a ranking as reported to consumers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedProvider {
    pub provider_id: ProviderId,
    /// Score in percent.
    pub score: f64,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub method: RankingMethod,
    pub entries: Vec<RankedProvider>,
}

impl From<&RankingTable<f64>> for Ranking {
    fn from(t: &RankingTable<f64>) -> Self {
        Self {
            method: t.method,
            entries: t
                .entries
                .iter()
                .map(|e| RankedProvider { provider_id: e.provider_id.clone(), score: e.score * 100.0, rank: e.rank })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegotiationAttempt {
    pub provider_id: ProviderId,
    pub result: NegotiationResult<f64>,
}

/// Everything the broker did for one SLA request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub session_id: String,
    pub consumer_id: String,
    pub request: SlaRequestDoc,
    pub ranking: Ranking,
    /// Provider of the final attempt.
    pub provider_id: ProviderId,
    pub state: SessionState,
    pub outcome: Outcome,
    /// One entry unless fallback is enabled.
    pub attempts: Vec<NegotiationAttempt>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sla_id: Option<String>,
}
