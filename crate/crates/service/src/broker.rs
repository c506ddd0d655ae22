use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use chrono::Utc;
use parking_lot::Mutex;
use slabroker_core::monitoring::{
    evaluate_compliance, map_metrics, ComplianceReport, IngestReport, MetricMapping, MetricSample, MonitorError,
    SampleStore, TimeWindow,
};
use slabroker_core::negotiation::{run_negotiation, AttributeUtility, NegotiationError, NegotiationSession, Outcome, SessionConfig};
use slabroker_core::provider::{ProviderAgent, ProviderSession};
use slabroker_core::qos::{select_best, Offer, ProviderId, QosError};
use slabroker_core::sla::{build_agreement, normalize_value, to_requirement, Sla, SlaError, SlaRequestDoc, TermScale};

use crate::config::BrokerConfig;
use crate::model::{ConsumerProfile, NegotiationAttempt, ProviderRecord, Ranking, SessionRecord};
use crate::store::{Family, Log, StoreError};

#[derive(Debug, thiserror::Error)]
pub enum BrokerError {
    #[error("{kind} `{id}` not found")]
    NotFound { kind: &'static str, id: String },
    #[error("no providers are registered")]
    NoProviders,
    #[error("provider `{0}` is already registered with a different record")]
    ConflictingRecord(ProviderId),
    #[error("attribute mismatch: {0}")]
    AttributeMismatch(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("selection failed: {0}")]
    SelectionFailed(#[from] QosError),
    #[error(transparent)]
    Sla(#[from] SlaError),
    #[error(transparent)]
    Negotiation(#[from] NegotiationError),
    #[error(transparent)]
    Monitor(#[from] MonitorError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// Provider registry, profiles, negotiation sessions, SLAs and metrics,
/// persisted under one data directory.
pub struct Broker {
    config: BrokerConfig,
    data_dir: PathBuf,
    providers: Family<ProviderRecord>,
    profiles: Family<ConsumerProfile>,
    sessions: Family<SessionRecord>,
    slas: Family<Sla>,
    metrics: Log<MetricSample>,
    submit: Mutex<()>,
}

impl Broker {
    pub fn open(data_dir: impl AsRef<Path>, config: BrokerConfig) -> Result<Self, BrokerError> {
        config.validate().map_err(|e| BrokerError::Invalid(e.to_string()))?;
        let dir = data_dir.as_ref().to_owned();
        std::fs::create_dir_all(&dir).map_err(|source| StoreError::Io { path: dir.clone(), source })?;
        Ok(Self {
            providers: Family::open(dir.join("providers.jsonl"))?,
            profiles: Family::open(dir.join("profiles.jsonl"))?,
            sessions: Family::open(dir.join("sessions.jsonl"))?,
            slas: Family::open(dir.join("slas.jsonl"))?,
            metrics: Log::open(dir.join("metrics.jsonl"))?,
            submit: Mutex::new(()),
            data_dir: dir,
            config,
        })
    }

    pub fn config(&self) -> &BrokerConfig {
        &self.config
    }

    pub fn data_dir(&self) -> &Path {
        &self.data_dir
    }

    fn required_attributes(&self, exclude: &ProviderId) -> Option<BTreeSet<String>> {
        if !self.config.attributes.is_empty() {
            return Some(self.config.attributes.iter().cloned().collect());
        }
        let snapshot = self.providers.snapshot();
        snapshot
            .values()
            .find(|r| r.id() != exclude)
            .map(|r| r.offer.values.keys().cloned().collect())
    }

    /// Registers `record`. Re-registering an identical record is a no-op;
    /// a changed record needs `update`.
    pub fn register_provider(&self, record: ProviderRecord, update: bool) -> Result<ProviderId, BrokerError> {
        let id = record.id().clone();
        if id.as_str().is_empty() {
            return Err(BrokerError::Invalid("provider_id must not be empty".into()));
        }
        if let Some((name, _)) = record.offer.values.iter().find(|(_, v)| !v.is_finite()) {
            return Err(BrokerError::Invalid(format!("offer value for `{name}` is not finite")));
        }
        if let Some((name, _)) = record.template_bounds.iter().find(|(_, b)| b.lo.partial_cmp(&b.hi).is_none_or(std::cmp::Ordering::is_gt)) {
            return Err(BrokerError::Invalid(format!("template bound for `{name}` has lo > hi")));
        }
        record.strategy.validate()?;
        if let Some(required) = self.required_attributes(&id) {
            let have: BTreeSet<String> = record.offer.values.keys().cloned().collect();
            if have != required {
                let missing: Vec<_> = required.difference(&have).cloned().collect();
                let extra: Vec<_> = have.difference(&required).cloned().collect();
                return Err(BrokerError::AttributeMismatch(format!(
                    "offer {id}: missing {missing:?}, unexpected {extra:?}"
                )));
            }
        }
        self.providers.put_with(id.as_str(), record.clone(), |current| match current {
            None => Ok(true),
            Some(existing) if *existing == record => Ok(false),
            Some(_) if update => Ok(true),
            Some(_) => Err(BrokerError::ConflictingRecord(id.clone())),
        })?;
        Ok(id)
    }

    pub fn get_provider(&self, id: &str) -> Result<ProviderRecord, BrokerError> {
        self.providers.get(id).ok_or_else(|| BrokerError::NotFound { kind: "provider", id: id.into() })
    }

    pub fn providers(&self) -> Vec<ProviderRecord> {
        self.providers.snapshot().values().cloned().collect()
    }

    pub fn set_profile(&self, consumer_id: &str, mut profile: ConsumerProfile) -> Result<(), BrokerError> {
        profile.consumer_id = consumer_id.to_owned();
        profile.validate().map_err(BrokerError::Invalid)?;
        self.profiles.put(consumer_id, profile)?;
        Ok(())
    }

    pub fn get_profile(&self, consumer_id: &str) -> Result<ConsumerProfile, BrokerError> {
        self.profiles.get(consumer_id).ok_or_else(|| BrokerError::NotFound { kind: "profile", id: consumer_id.into() })
    }

    /// Profile derived from a request: its weights, the configured default
    /// sensitivities.
    fn default_profile(&self, consumer_id: &str, doc: &SlaRequestDoc) -> Result<ConsumerProfile, BrokerError> {
        let registry = self.config.registry();
        let attributes = doc
            .entries
            .iter()
            .map(|e| {
                Ok(AttributeUtility::new(
                    e.name.clone(),
                    registry.direction_of(&e.name)?,
                    self.config.default_alpha,
                    self.config.default_beta,
                    e.weight,
                ))
            })
            .collect::<Result<Vec<_>, SlaError>>()?;
        Ok(ConsumerProfile {
            consumer_id: consumer_id.to_owned(),
            attributes,
            threshold: None,
            max_rounds: None,
            preferences: BTreeMap::new(),
        })
    }

    fn agent_for(&self, record: &ProviderRecord, doc: &SlaRequestDoc) -> Result<ProviderAgent<f64>, BrokerError> {
        let registry = self.config.registry();
        let best_terms = match &record.best_offer {
            None => None,
            Some(raw) => Some(
                doc.entries
                    .iter()
                    .map(|e| {
                        let v = raw.get(&e.name).copied().or_else(|| record.offer.values.get(&e.name).copied()).ok_or_else(|| {
                            BrokerError::AttributeMismatch(format!("provider {} has no `{}`", record.id(), e.name))
                        })?;
                        Ok((e.name.clone(), normalize_value(v, e, registry.direction_of(&e.name)?, TermScale::Position)))
                    })
                    .collect::<Result<BTreeMap<_, _>, BrokerError>>()?,
            ),
        };
        let mut agent = ProviderAgent::from_offer(record.offer.clone(), doc, &registry, best_terms, record.strategy)?;
        agent.template_bounds = record.template_bounds.clone();
        agent.validate()?;
        Ok(agent)
    }

    /// Selects the best registered provider for `doc`, negotiates with it
    /// and, on agreement, stores the resulting SLA.
    pub fn submit_request(&self, consumer_id: Option<&str>, doc: SlaRequestDoc) -> Result<SessionRecord, BrokerError> {
        doc.validate()?;
        let consumer_id = consumer_id.map(str::to_owned).or_else(|| doc.consumer_id.clone()).unwrap_or_else(|| "anonymous".into());
        let registry = self.config.registry();

        let offers: Vec<Offer<f64>> = self.providers.snapshot().values().filter(|r| r.live).map(|r| r.offer.clone()).collect();
        if offers.is_empty() {
            return Err(BrokerError::NoProviders);
        }
        let (requirement, specs) = to_requirement::<f64>(&doc, &registry)?;
        let table = select_best(&offers, &requirement, &specs)?;

        let profile = match self.profiles.get(&consumer_id) {
            Some(p) => p,
            None => {
                let p = self.default_profile(&consumer_id, &doc)?;
                self.profiles.put(&consumer_id, p.clone())?;
                p
            }
        };
        let params = profile.params().map_err(BrokerError::Invalid)?;
        let negotiated: BTreeSet<&str> = params.attributes().iter().map(|a| a.name.as_str()).collect();
        let requested: BTreeSet<&str> = doc.entries.iter().map(|e| e.name.as_str()).collect();
        if negotiated != requested {
            return Err(BrokerError::AttributeMismatch(format!(
                "profile of `{consumer_id}` covers {negotiated:?}, request covers {requested:?}"
            )));
        }
        let session_config = SessionConfig {
            threshold: profile.threshold.unwrap_or(self.config.threshold),
            max_rounds: profile.max_rounds.unwrap_or(self.config.max_rounds),
            concession: self.config.concession,
            ideal: None,
        };

        // one submission at a time owns id allocation and the session record
        let _owner = self.submit.lock();
        let session_id = self.next_session_id();
        let candidates = if self.config.fallback { table.entries.len() } else { 1 };

        let mut attempts = Vec::new();
        let mut concluded = None;
        for entry in table.entries.iter().take(candidates) {
            let record = self.get_provider(entry.provider_id.as_str())?;
            let agent = self.agent_for(&record, &doc)?;
            let mut session = NegotiationSession::new(session_id.clone(), params.clone(), session_config.clone())?;
            let mut provider = ProviderSession::new(agent).with_request(doc.clone());
            let result = run_negotiation(&mut session, params.ideal_terms(), &mut provider)?;
            tracing::info!(session = %session_id, provider = %entry.provider_id, outcome = ?result.outcome, "negotiation finished");
            let agreed = result.outcome == Outcome::Agreement;
            attempts.push(NegotiationAttempt { provider_id: entry.provider_id.clone(), result });
            concluded = Some((entry.provider_id.clone(), session));
            if agreed {
                break;
            }
        }
        let (provider_id, session) = concluded.expect("ranking has at least one entry");

        let mut sla_id = None;
        if session.outcome() == Some(Outcome::Agreement) {
            let sla = build_agreement(&session, &doc, provider_id.clone(), &registry, &self.config.agreement, Utc::now())?;
            let id = sla.id.clone();
            self.slas.put(&id, sla)?;
            sla_id = Some(id);
        }
        let record = SessionRecord {
            session_id: session_id.clone(),
            consumer_id,
            request: doc,
            ranking: Ranking::from(&table),
            provider_id,
            state: session.state(),
            outcome: session.outcome().expect("negotiation ran to a terminal state"),
            attempts,
            sla_id,
        };
        self.sessions.put(&session_id, record.clone())?;
        Ok(record)
    }

    fn next_session_id(&self) -> String {
        let mut n = self.sessions.len() + 1;
        loop {
            let id = format!("s-{n:06}");
            if self.sessions.get(&id).is_none() {
                return id;
            }
            n += 1;
        }
    }

    pub fn get_session(&self, id: &str) -> Result<SessionRecord, BrokerError> {
        self.sessions.get(id).ok_or_else(|| BrokerError::NotFound { kind: "session", id: id.into() })
    }

    pub fn sessions(&self) -> Vec<SessionRecord> {
        self.sessions.snapshot().values().cloned().collect()
    }

    pub fn get_sla(&self, id: &str) -> Result<Sla, BrokerError> {
        self.slas.get(id).ok_or_else(|| BrokerError::NotFound { kind: "sla", id: id.into() })
    }

    pub fn slas(&self) -> Vec<Sla> {
        self.slas.snapshot().values().cloned().collect()
    }

    fn sample_store(&self, sla_id: &str) -> SampleStore {
        let mut store = SampleStore::new();
        for s in self.metrics.items(sla_id) {
            store.insert(s);
        }
        store
    }

    /// Ingests a JSON-lines feed for `sla_id`; only new samples are stored.
    pub fn post_metrics(&self, sla_id: &str, feed: &[u8]) -> Result<IngestReport, BrokerError> {
        self.get_sla(sla_id)?;
        let mut store = self.sample_store(sla_id);
        let before: BTreeSet<(i64, String, String)> =
            store.iter().map(|s| (s.timestamp, s.metric_name, s.source_id)).collect();
        let report = store.ingest(feed);
        let fresh: Vec<MetricSample> = store
            .iter()
            .filter(|s| !before.contains(&(s.timestamp, s.metric_name.clone(), s.source_id.clone())))
            .collect();
        self.metrics.append(sla_id, &fresh)?;
        Ok(report)
    }

    fn mapping_for(&self, sla: &Sla) -> Result<MetricMapping, BrokerError> {
        let mut rules = MetricMapping::identity_for(sla).rules().to_vec();
        for rule in &mut rules {
            if let Some(custom) = self.config.metric_mapping.iter().find(|r| r.indicator == rule.indicator) {
                *rule = custom.clone();
            }
        }
        Ok(MetricMapping::new(rules)?)
    }

    pub fn get_compliance(&self, sla_id: &str, window: TimeWindow) -> Result<ComplianceReport, BrokerError> {
        let sla = self.get_sla(sla_id)?;
        let mapping = self.mapping_for(&sla)?;
        let series = map_metrics(&mapping, &self.sample_store(sla_id), self.config.bucket_ms);
        Ok(evaluate_compliance(&sla, &series, window)?)
    }
}
