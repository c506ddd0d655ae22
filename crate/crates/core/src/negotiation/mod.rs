//! Bilateral multi-attribute SLA bargaining.
//!
//! The broker opens with an SLA request, the provider answers with
//! proposals, and the broker either confirms, counters, or withdraws once
//! the round budget is spent. Acceptance is decided by the consumer's
//! global utility against a threshold.

mod driver;
mod session;
mod strategy;
mod utility;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

pub use driver::{run_negotiation, Counterparty, NegotiationResult};
pub use session::{Decision, NegotiationSession, SessionConfig, SessionState, TranscriptEntry};
pub use strategy::{interpolate, Concession, CounterStrategy};
pub use utility::{global_utility, utility_cost, utility_gain, utility_gain_slope, AttributeUtility, UtilityParams};

/// Normalized levels keyed by attribute name.
pub type Terms<T> = BTreeMap<String, T>;

pub const DEFAULT_THRESHOLD: f64 = 0.65;
pub const DEFAULT_MAX_ROUNDS: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Party {
    Broker,
    Provider,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageKind {
    SlaRequest,
    Proposal,
    CounterProposal,
    SlaConfirmation,
    Reject,
    Withdraw,
}

impl MessageKind {
    pub fn carries_terms(self) -> bool {
        matches!(self, MessageKind::SlaRequest | MessageKind::Proposal | MessageKind::CounterProposal)
    }
}

impl fmt::Display for MessageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Agreement,
    MaxRoundsExceeded,
    Rejected,
    Withdrawn,
}

/// One protocol message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ProposalMessage<T: Scalar> {
    pub kind: MessageKind,
    pub from: Party,
    pub round: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Terms<T>>,
    /// Free-form notes (price, penalties, rejection reasons).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub annotations: BTreeMap<String, String>,
}

impl<T: Scalar> ProposalMessage<T> {
    pub fn new(kind: MessageKind, from: Party, round: u32, terms: Option<Terms<T>>) -> Result<Self, NegotiationError> {
        let msg = Self { kind, from, round, terms, annotations: BTreeMap::new() };
        msg.validate()?;
        Ok(msg)
    }

    /// A message kind that carries terms.
    pub fn with_terms(kind: MessageKind, from: Party, round: u32, terms: Terms<T>) -> Result<Self, NegotiationError> {
        Self::new(kind, from, round, Some(terms))
    }

    /// A message kind without terms (confirmation, reject, withdraw).
    pub fn control(kind: MessageKind, from: Party, round: u32) -> Result<Self, NegotiationError> {
        Self::new(kind, from, round, None)
    }

    pub fn annotate(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.annotations.insert(key.into(), value.into());
        self
    }

    /// Terms are present iff the kind carries them, and every level is in `[0,1]`.
    pub fn validate(&self) -> Result<(), NegotiationError> {
        match (&self.terms, self.kind.carries_terms()) {
            (Some(_), false) | (None, true) => Err(NegotiationError::MalformedMessage(format!(
                "{} must {}carry terms",
                self.kind,
                if self.kind.carries_terms() { "" } else { "not " }
            ))),
            (Some(terms), true) => match terms.iter().find(|(_, v)| !(**v >= T::zero() && **v <= T::one())) {
                Some((name, v)) => Err(NegotiationError::MalformedMessage(format!("term `{name}` = {v} outside [0,1]"))),
                None => Ok(()),
            },
            (None, false) => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NegotiationError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("attribute mismatch: {0}")]
    AttributeMismatch(String),
    #[error("weights sum to {sum}, expected 1")]
    WeightSumError { sum: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("malformed message: {0}")]
    MalformedMessage(String),
    #[error("protocol violation: {message} from {from:?} not allowed in state {state:?}{}", detail.as_deref().map(|d| format!(" ({d})")).unwrap_or_default())]
    ProtocolViolation {
        state: SessionState,
        message: MessageKind,
        from: Party,
        detail: Option<String>,
    },
    #[error("protocol violation on the provider side: {message} not allowed in state {state} ({detail})")]
    ProviderProtocolViolation { state: String, message: MessageKind, detail: String },
}
