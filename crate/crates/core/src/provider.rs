//! Simulated SaaS providers.
//!
//! A provider validates an incoming SLA request against its templates,
//! answers with proposals that concede from its opening terms toward its
//! best terms, and takes the broker's counter outright when the counter is
//! no better for the broker than what it was prepared to give anyway. All
//! of this is simulation scaffolding.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::negotiation::{
    interpolate, run_negotiation, Concession, Counterparty, MessageKind, NegotiationError, NegotiationResult, NegotiationSession,
    Party, ProposalMessage, SessionConfig, Terms, UtilityParams,
};
use crate::qos::{Direction, Offer, ProviderId};
use crate::scalar::Scalar;
use crate::sla::{normalize_value, DirectionRegistry, SlaError, SlaRequestDoc, TermScale};

/// Acceptable raw interval for one attribute.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct TemplateBound<T: Scalar> {
    pub lo: T,
    pub hi: T,
}

/// Immutable provider configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ProviderAgent<T: Scalar> {
    pub provider_id: ProviderId,
    pub advertised_offer: Offer<T>,
    pub directions: BTreeMap<String, Direction>,
    /// First proposal, as negotiation levels.
    pub opening_terms: Terms<T>,
    /// Most the provider will concede to, as negotiation levels.
    pub best_terms: Terms<T>,
    #[serde(default)]
    pub strategy: Concession<T>,
    #[serde(default)]
    pub template_bounds: BTreeMap<String, TemplateBound<T>>,
    /// Whether a counter inside `best_terms` is taken as is.
    #[serde(default = "yes")]
    pub accept_counters: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "attributes", rename_all = "snake_case")]
pub enum RequestCheck {
    Accept,
    /// Attributes whose requested interval misses the template.
    Reject(Vec<String>),
}

impl<T: Scalar> ProviderAgent<T> {
    pub fn validate(&self) -> Result<(), NegotiationError> {
        let unit = |v: &T| *v >= T::zero() && *v <= T::one();
        for (label, terms) in [("best", &self.best_terms), ("opening", &self.opening_terms)] {
            if let Some((name, v)) = terms.iter().find(|(_, v)| !unit(v)) {
                return Err(NegotiationError::InvalidConfig(format!("{label} term `{name}` = {v} outside [0,1]")));
            }
            if let Some(name) = terms.keys().find(|k| !self.directions.contains_key(*k)) {
                return Err(NegotiationError::InvalidConfig(format!("no direction for {label} term `{name}`")));
            }
        }
        if self.opening_terms.keys().ne(self.best_terms.keys()) {
            return Err(NegotiationError::InvalidConfig("opening and best terms cover different attributes".into()));
        }
        if let Some((name, _)) = self.template_bounds.iter().find(|(_, b)| b.lo.partial_cmp(&b.hi).is_none_or(std::cmp::Ordering::is_gt)) {
            return Err(NegotiationError::InvalidConfig(format!("template bound for `{name}` has lo > hi")));
        }
        self.strategy.validate()
    }

    /// Builds an agent whose opening terms are its advertised offer placed
    /// on the request's ranges, and which never concedes beyond them unless
    /// `best_terms` says otherwise.
    pub fn from_offer(
        offer: Offer<T>,
        doc: &SlaRequestDoc,
        registry: &DirectionRegistry,
        best_terms: Option<Terms<T>>,
        strategy: Concession<T>,
    ) -> Result<Self, SlaError> {
        let mut directions = BTreeMap::new();
        let mut opening = BTreeMap::new();
        for entry in &doc.entries {
            let raw = offer
                .values
                .get(&entry.name)
                .ok_or_else(|| SlaError::AttributeMismatch(format!("offer {} lacks `{}`", offer.provider_id, entry.name)))?;
            let direction = registry.direction_of(&entry.name)?;
            directions.insert(entry.name.clone(), direction);
            opening.insert(entry.name.clone(), T::lit(normalize_value(raw.as_f64(), entry, direction, TermScale::Position)));
        }
        Ok(Self {
            provider_id: offer.provider_id.clone(),
            best_terms: best_terms.unwrap_or_else(|| opening.clone()),
            opening_terms: opening,
            advertised_offer: offer,
            directions,
            strategy,
            template_bounds: BTreeMap::new(),
            accept_counters: true,
        })
    }

    fn favours_broker(&self, name: &str, candidate: T, reference: T) -> bool {
        match self.directions.get(name) {
            Some(Direction::CostDriven) => candidate < reference,
            _ => candidate > reference,
        }
    }

    /// Clamps terms so that no level is better for the broker than `best_terms`.
    fn within_ceiling(&self, terms: Terms<T>) -> Terms<T> {
        terms
            .into_iter()
            .map(|(name, v)| {
                let capped = match self.best_terms.get(&name) {
                    Some(best) if self.favours_broker(&name, v, *best) => *best,
                    _ => v,
                };
                (name, capped)
            })
            .collect()
    }

    /// Whether the counter asks for nothing beyond `best_terms`.
    pub fn counter_is_acceptable(&self, counter: &Terms<T>) -> bool {
        counter.keys().eq(self.best_terms.keys())
            && counter.iter().all(|(name, v)| !self.favours_broker(name, *v, self.best_terms[name]))
    }

    /// Terms the strategy reaches after `round` concession steps.
    pub fn concession_terms(&self, round: u32) -> Terms<T> {
        self.within_ceiling(interpolate(&self.opening_terms, &self.best_terms, self.strategy.fraction(round)))
    }
}

/// Accepts iff every requested `[min, max]` interval intersects the
/// provider's template for that attribute. Attributes without a template
/// are unconstrained.
pub fn validate_request<T: Scalar>(agent: &ProviderAgent<T>, doc: &SlaRequestDoc) -> RequestCheck {
    let misses: Vec<String> = doc
        .entries
        .iter()
        .filter(|e| {
            agent.template_bounds.get(&e.name).is_some_and(|b| {
                let (lo, hi) = (b.lo.as_f64(), b.hi.as_f64());
                e.max_value < lo || e.min_value > hi
            })
        })
        .map(|e| e.name.clone())
        .collect();
    if misses.is_empty() {
        RequestCheck::Accept
    } else {
        RequestCheck::Reject(misses)
    }
}

/// The provider's answer to an SLA request or counter-proposal.
///
/// `round` is the number of concession steps taken so far (0 for the
/// answer to the request). A counter that stays within `best_terms` is
/// echoed back as the proposal, which closes the deal.
pub fn respond<T: Scalar>(
    agent: &ProviderAgent<T>,
    incoming: &ProposalMessage<T>,
    round: u32,
) -> Result<ProposalMessage<T>, NegotiationError> {
    let violation = |detail: &str| NegotiationError::ProviderProtocolViolation {
        state: "responding".into(),
        message: incoming.kind,
        detail: detail.into(),
    };
    if !matches!(incoming.kind, MessageKind::SlaRequest | MessageKind::CounterProposal) {
        return Err(violation("only SLA requests and counter-proposals get a proposal"));
    }
    let next_round = incoming.round + 1;
    if incoming.kind == MessageKind::CounterProposal && agent.accept_counters {
        if let Some(counter) = incoming.terms.as_ref().filter(|c| agent.counter_is_acceptable(c)) {
            return Ok(ProposalMessage::with_terms(MessageKind::Proposal, Party::Provider, next_round, counter.clone())?
                .annotate("note", "counter-proposal accepted"));
        }
    }
    ProposalMessage::with_terms(MessageKind::Proposal, Party::Provider, next_round, agent.concession_terms(round))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderState {
    Idle,
    ProposalSent,
    Agreed,
    Failed,
}

/// Provider-side protocol state machine around a [`ProviderAgent`].
#[derive(Debug, Clone)]
pub struct ProviderSession<T: Scalar> {
    agent: ProviderAgent<T>,
    request: Option<SlaRequestDoc>,
    state: ProviderState,
    proposals_sent: u32,
}

impl<T: Scalar> ProviderSession<T> {
    pub fn new(agent: ProviderAgent<T>) -> Self {
        Self { agent, request: None, state: ProviderState::Idle, proposals_sent: 0 }
    }

    /// Request document to check against the templates when the SLA
    /// request arrives.
    pub fn with_request(mut self, doc: SlaRequestDoc) -> Self {
        self.request = Some(doc);
        self
    }

    pub fn state(&self) -> ProviderState {
        self.state
    }

    pub fn agent(&self) -> &ProviderAgent<T> {
        &self.agent
    }

    fn violation(&self, message: &ProposalMessage<T>) -> NegotiationError {
        NegotiationError::ProviderProtocolViolation {
            state: format!("{:?}", self.state),
            message: message.kind,
            detail: format!("from {:?}", message.from),
        }
    }

    fn propose(&mut self, message: &ProposalMessage<T>) -> Result<Option<ProposalMessage<T>>, NegotiationError> {
        let reply = respond(&self.agent, message, self.proposals_sent)?;
        self.proposals_sent += 1;
        self.state = ProviderState::ProposalSent;
        Ok(Some(reply))
    }
}

impl<T: Scalar> Counterparty<T> for ProviderSession<T> {
    fn receive(&mut self, message: &ProposalMessage<T>) -> Result<Option<ProposalMessage<T>>, NegotiationError> {
        if message.from != Party::Broker || matches!(self.state, ProviderState::Agreed | ProviderState::Failed) {
            return Err(self.violation(message));
        }
        match (self.state, message.kind) {
            (_, MessageKind::Withdraw | MessageKind::Reject) => {
                self.state = ProviderState::Failed;
                Ok(None)
            }
            (ProviderState::Idle, MessageKind::SlaRequest) => {
                if let Some(RequestCheck::Reject(attributes)) = self.request.as_ref().map(|d| validate_request(&self.agent, d)) {
                    self.state = ProviderState::Failed;
                    let reject = ProposalMessage::control(MessageKind::Reject, Party::Provider, message.round)?
                        .annotate("reason", format!("outside templates: {}", attributes.join(", ")));
                    return Ok(Some(reject));
                }
                self.propose(message)
            }
            (ProviderState::ProposalSent, MessageKind::CounterProposal) => self.propose(message),
            (ProviderState::ProposalSent, MessageKind::SlaConfirmation) => {
                self.state = ProviderState::Agreed;
                ProposalMessage::control(MessageKind::SlaConfirmation, Party::Provider, message.round).map(Some)
            }
            _ => Err(self.violation(message)),
        }
    }
}

/// A self-contained bilateral negotiation: broker preferences and session
/// settings against one simulated provider.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Scenario<T: Scalar> {
    pub params: UtilityParams<T>,
    #[serde(default)]
    pub session: SessionConfig<T>,
    pub provider: ProviderAgent<T>,
    /// Levels sent with the SLA request; the broker's ideal when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub request_terms: Option<Terms<T>>,
}

impl<T: Scalar> Scenario<T> {
    /// Runs the scenario to a terminal state.
    pub fn run(&self, session_id: &str) -> Result<NegotiationResult<T>, NegotiationError> {
        self.provider.validate()?;
        let mut session = NegotiationSession::new(session_id, self.params.clone(), self.session.clone())?;
        let request = self.request_terms.clone().unwrap_or_else(|| self.params.ideal_terms());
        let mut provider = ProviderSession::new(self.provider.clone());
        run_negotiation(&mut session, request, &mut provider)
    }
}
