//! Broker engine for SLA-aware SaaS provisioning.
//!
//! The crate covers four concerns:
//!
//! - [`qos`]: normalization of provider QoS offerings, weighted-utility
//!   ranking and a TOPSIS cross-check.
//! - [`negotiation`]: per-attribute utility functions, the broker-side
//!   bargaining state machine and the negotiation driver.
//! - [`provider`]: simulated provider agents answering the broker.
//! - [`sla`] and [`monitoring`]: agreement documents, quality-requirement
//!   ingestion and windowed SLO compliance evaluation.
//!
//! The numeric kernels are generic over a [`Scalar`] (`f32` or `f64`).
//! Concrete `f64` aliases are exported at the crate root for callers that do
//! not care about the scalar type.

pub mod monitoring;
pub mod negotiation;
pub mod provider;
pub mod qos;
pub mod scalar;
pub mod sla;

pub use scalar::Scalar;

pub type QosAttributeSpec64 = qos::QosAttributeSpec<f64>;
pub type Offer64 = qos::Offer<f64>;
pub type Requirement64 = qos::Requirement<f64>;
pub type NormalizedMatrix64 = qos::NormalizedMatrix<f64>;
pub type RankingTable64 = qos::RankingTable<f64>;

pub type UtilityParams64 = negotiation::UtilityParams<f64>;
pub type ProposalMessage64 = negotiation::ProposalMessage<f64>;
pub type NegotiationSession64 = negotiation::NegotiationSession<f64>;
pub type NegotiationResult64 = negotiation::NegotiationResult<f64>;
pub type ProviderAgent64 = provider::ProviderAgent<f64>;
pub type Scenario64 = provider::Scenario<f64>;

pub type QosAttributeSpec32 = qos::QosAttributeSpec<f32>;
pub type Offer32 = qos::Offer<f32>;
pub type Requirement32 = qos::Requirement<f32>;
pub type RankingTable32 = qos::RankingTable<f32>;
pub type UtilityParams32 = negotiation::UtilityParams<f32>;
