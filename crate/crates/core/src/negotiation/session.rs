use serde::{Deserialize, Serialize};

use super::{
    global_utility, interpolate, Concession, CounterStrategy, MessageKind, NegotiationError, Outcome, Party, ProposalMessage, Terms,
    UtilityParams, DEFAULT_MAX_ROUNDS, DEFAULT_THRESHOLD,
};
use crate::scalar::Scalar;

/// Broker-side protocol state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionState {
    Idle,
    RequestSent,
    Evaluating,
    CounterSent,
    Confirming,
    Agreed,
    Failed,
}

impl SessionState {
    pub fn is_terminal(self) -> bool {
        matches!(self, SessionState::Agreed | SessionState::Failed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Accept,
    Counter,
    Withdraw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SessionConfig<T: Scalar> {
    pub threshold: T,
    pub max_rounds: u32,
    #[serde(default)]
    pub concession: Concession<T>,
    /// Broker's opening position for counters; defaults to the utility
    /// peak of every attribute.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ideal: Option<Terms<T>>,
}

impl<T: Scalar> Default for SessionConfig<T> {
    fn default() -> Self {
        Self {
            threshold: T::lit(DEFAULT_THRESHOLD),
            max_rounds: DEFAULT_MAX_ROUNDS,
            concession: Concession::default(),
            ideal: None,
        }
    }
}

/// A message as logged, with the broker's utility for its terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct TranscriptEntry<T: Scalar> {
    #[serde(flatten)]
    pub message: ProposalMessage<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub utility: Option<T>,
}

/// The broker's side of one negotiation.
///
/// Single-owner: drive it with [`open`](Self::open) and then
/// [`step`](Self::step) for every provider message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct NegotiationSession<T: Scalar> {
    session_id: String,
    state: SessionState,
    round: u32,
    max_rounds: u32,
    threshold: T,
    params: UtilityParams<T>,
    ideal: Terms<T>,
    concession: Concession<T>,
    transcript: Vec<TranscriptEntry<T>>,
    outcome: Option<Outcome>,
    last_decision: Option<Decision>,
    agreed_terms: Option<Terms<T>>,
}

impl<T: Scalar> NegotiationSession<T> {
    pub fn new(session_id: impl Into<String>, params: UtilityParams<T>, config: SessionConfig<T>) -> Result<Self, NegotiationError> {
        if !(config.threshold >= T::zero() && config.threshold <= T::one()) {
            return Err(NegotiationError::InvalidConfig(format!("threshold {} outside [0,1]", config.threshold)));
        }
        if config.max_rounds == 0 {
            return Err(NegotiationError::InvalidConfig("max_rounds must be at least 1".into()));
        }
        config.concession.validate()?;
        let ideal = match config.ideal {
            Some(ideal) => {
                global_utility(&ideal, &params)?;
                ideal
            }
            None => params.ideal_terms(),
        };
        Ok(Self {
            session_id: session_id.into(),
            state: SessionState::Idle,
            round: 0,
            max_rounds: config.max_rounds,
            threshold: config.threshold,
            params,
            ideal,
            concession: config.concession,
            transcript: Vec::new(),
            outcome: None,
            last_decision: None,
            agreed_terms: None,
        })
    }

    pub fn session_id(&self) -> &str {
        &self.session_id
    }

    pub fn state(&self) -> SessionState {
        self.state
    }

    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn max_rounds(&self) -> u32 {
        self.max_rounds
    }

    pub fn threshold(&self) -> T {
        self.threshold
    }

    pub fn params(&self) -> &UtilityParams<T> {
        &self.params
    }

    pub fn transcript(&self) -> &[TranscriptEntry<T>] {
        &self.transcript
    }

    pub fn outcome(&self) -> Option<Outcome> {
        self.outcome
    }

    /// Terms of the accepted proposal, once the broker has accepted one.
    pub fn agreed_terms(&self) -> Option<&Terms<T>> {
        self.agreed_terms.as_ref()
    }

    /// Most recent provider terms.
    pub fn last_opponent_terms(&self) -> Option<&Terms<T>> {
        self.transcript
            .iter()
            .rev()
            .find(|e| e.message.from == Party::Provider && e.message.terms.is_some())
            .and_then(|e| e.message.terms.as_ref())
    }

    fn violation(&self, msg: &ProposalMessage<T>, detail: impl Into<Option<String>>) -> NegotiationError {
        NegotiationError::ProtocolViolation { state: self.state, message: msg.kind, from: msg.from, detail: detail.into() }
    }

    fn record(&mut self, message: ProposalMessage<T>) -> ProposalMessage<T> {
        let utility = message.terms.as_ref().and_then(|t| global_utility(t, &self.params).ok());
        self.transcript.push(TranscriptEntry { message: message.clone(), utility });
        message
    }

    fn finish(&mut self, state: SessionState, outcome: Outcome) {
        self.state = state;
        self.outcome = Some(outcome);
    }

    /// Sends the SLA request carrying the consumer's requested levels.
    pub fn open(&mut self, request_terms: Terms<T>) -> Result<ProposalMessage<T>, NegotiationError> {
        let msg = ProposalMessage::with_terms(MessageKind::SlaRequest, Party::Broker, 0, request_terms)?;
        if self.state != SessionState::Idle {
            return Err(self.violation(&msg, None));
        }
        global_utility(msg.terms.as_ref().expect("request has terms"), &self.params)?;
        self.state = SessionState::RequestSent;
        Ok(self.record(msg))
    }

    /// Decides on a provider proposal: accept at or above the threshold,
    /// counter while rounds remain, withdraw on the last round.
    pub fn evaluate_offer(&self, proposal: &ProposalMessage<T>) -> Result<Decision, NegotiationError> {
        let allowed = matches!(self.state, SessionState::RequestSent | SessionState::CounterSent | SessionState::Evaluating);
        if !allowed || proposal.kind != MessageKind::Proposal {
            return Err(self.violation(proposal, None));
        }
        proposal.validate()?;
        let terms = proposal.terms.as_ref().expect("validated proposal has terms");
        let utility = global_utility(terms, &self.params)?;
        Ok(if utility >= self.threshold {
            Decision::Accept
        } else if proposal.round < self.max_rounds {
            Decision::Counter
        } else {
            Decision::Withdraw
        })
    }

    /// Counter-proposal using the session's configured concession.
    pub fn generate_counter(&self) -> Result<ProposalMessage<T>, NegotiationError> {
        self.generate_counter_with(&self.concession)
    }

    /// Counter-proposal from `strategy`, conceding from the broker's ideal
    /// toward the provider's last terms, but never below the broker's own
    /// threshold: a counter the provider may simply echo back has to be one
    /// the broker would accept.
    pub fn generate_counter_with(&self, strategy: &dyn CounterStrategy<T>) -> Result<ProposalMessage<T>, NegotiationError> {
        let not_ready = || NegotiationError::ProtocolViolation {
            state: self.state,
            message: MessageKind::CounterProposal,
            from: Party::Broker,
            detail: Some("no pending counter decision".into()),
        };
        if self.state != SessionState::Evaluating || self.last_decision != Some(Decision::Counter) {
            return Err(not_ready());
        }
        let opponent = self.last_opponent_terms().ok_or_else(not_ready)?;
        let terms = self.floor_at_threshold(strategy.counter_terms(&self.ideal, opponent, self.round))?;
        ProposalMessage::with_terms(MessageKind::CounterProposal, Party::Broker, self.round, terms)
    }

    /// Pulls `terms` back toward the ideal until their utility reaches the
    /// threshold, by bisection on the segment between the two.
    fn floor_at_threshold(&self, terms: Terms<T>) -> Result<Terms<T>, NegotiationError> {
        if global_utility(&terms, &self.params)? >= self.threshold
            || global_utility(&self.ideal, &self.params)? < self.threshold
        {
            return Ok(terms);
        }
        let (mut lo, mut hi) = (T::zero(), T::one());
        for _ in 0..60 {
            let mid = (lo + hi) / T::lit(2.0);
            if global_utility(&interpolate(&self.ideal, &terms, mid), &self.params)? >= self.threshold {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(interpolate(&self.ideal, &terms, lo))
    }

    /// Feeds one provider message through the state machine and returns the
    /// broker's reply, if any.
    pub fn step(&mut self, incoming: ProposalMessage<T>) -> Result<Option<ProposalMessage<T>>, NegotiationError> {
        if self.state.is_terminal() || incoming.from != Party::Provider {
            return Err(self.violation(&incoming, None));
        }
        incoming.validate()?;

        match (self.state, incoming.kind) {
            (_, MessageKind::Reject) | (_, MessageKind::Withdraw) => {
                let outcome = if incoming.kind == MessageKind::Reject { Outcome::Rejected } else { Outcome::Withdrawn };
                self.record(incoming);
                self.finish(SessionState::Failed, outcome);
                Ok(None)
            }
            (SessionState::RequestSent | SessionState::CounterSent, MessageKind::Proposal) => {
                if incoming.round != self.round + 1 || incoming.round > self.max_rounds {
                    let detail = format!("expected round {}, got {}", self.round + 1, incoming.round);
                    return Err(self.violation(&incoming, detail));
                }
                let decision = self.evaluate_offer(&incoming)?;
                self.round = incoming.round;
                self.state = SessionState::Evaluating;
                self.last_decision = Some(decision);
                let accepted = incoming.terms.clone();
                self.record(incoming);

                let reply = match decision {
                    Decision::Accept => {
                        self.agreed_terms = accepted;
                        self.state = SessionState::Confirming;
                        ProposalMessage::control(MessageKind::SlaConfirmation, Party::Broker, self.round)?
                    }
                    Decision::Counter => {
                        let counter = self.generate_counter()?;
                        self.state = SessionState::CounterSent;
                        counter
                    }
                    Decision::Withdraw => {
                        self.finish(SessionState::Failed, Outcome::MaxRoundsExceeded);
                        ProposalMessage::control(MessageKind::Withdraw, Party::Broker, self.round)?
                            .annotate("reason", "maximum number of rounds reached")
                    }
                };
                Ok(Some(self.record(reply)))
            }
            (SessionState::Confirming, MessageKind::SlaConfirmation) => {
                self.record(incoming);
                self.finish(SessionState::Agreed, Outcome::Agreement);
                Ok(None)
            }
            _ => Err(self.violation(&incoming, None)),
        }
    }
}
