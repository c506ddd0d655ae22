use serde::{Deserialize, Serialize};

use super::{MessageKind, NegotiationError, NegotiationSession, Outcome, ProposalMessage, Terms, TranscriptEntry};
use crate::scalar::Scalar;

/// The other side of the table.
pub trait Counterparty<T: Scalar> {
    /// Handles one broker message and returns the reply, if the protocol
    /// calls for one.
    fn receive(&mut self, message: &ProposalMessage<T>) -> Result<Option<ProposalMessage<T>>, NegotiationError>;
}

/// Summary of a finished negotiation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct NegotiationResult<T: Scalar> {
    pub outcome: Outcome,
    pub rounds: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_terms: Option<Terms<T>>,
    pub transcript: Vec<TranscriptEntry<T>>,
}

impl<T: Scalar> NegotiationResult<T> {
    pub fn from_session(session: &NegotiationSession<T>) -> Option<Self> {
        let outcome = session.outcome()?;
        Some(Self {
            outcome,
            rounds: session.round(),
            final_terms: (outcome == Outcome::Agreement).then(|| session.agreed_terms().cloned()).flatten(),
            transcript: session.transcript().to_vec(),
        })
    }
}

/// Runs `session` against `provider` until a terminal state.
///
/// The exchange is bounded by `2·max_rounds + 2` messages; a counterparty
/// that goes silent or keeps talking past that is a protocol violation.
pub fn run_negotiation<T: Scalar, P: Counterparty<T> + ?Sized>(
    session: &mut NegotiationSession<T>,
    request_terms: Terms<T>,
    provider: &mut P,
) -> Result<NegotiationResult<T>, NegotiationError> {
    let budget = 2 * session.max_rounds() as usize + 2;
    let mut outgoing = session.open(request_terms)?;
    loop {
        let reply = provider.receive(&outgoing)?;
        if session.state().is_terminal() {
            // the provider only gets to observe our final withdraw
            break;
        }
        let Some(reply) = reply else {
            return Err(NegotiationError::ProtocolViolation {
                state: session.state(),
                message: outgoing.kind,
                from: outgoing.from,
                detail: Some("counterparty did not answer".into()),
            });
        };
        match session.step(reply)? {
            Some(next) => outgoing = next,
            None => break,
        }
        if session.transcript().len() > budget {
            return Err(NegotiationError::ProtocolViolation {
                state: session.state(),
                message: MessageKind::Proposal,
                from: outgoing.from,
                detail: Some(format!("exceeded {budget} messages")),
            });
        }
    }
    Ok(NegotiationResult::from_session(session).expect("terminal session has an outcome"))
}
