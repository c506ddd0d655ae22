//! The long-running broker behind the HTTP API.
//!
//! A [`Broker`] keeps the provider registry, consumer profiles, negotiation
//! sessions, agreements and monitoring samples in an append-only JSON-lines
//! store under one data directory. [`api::router`] exposes it over HTTP.
//!
//! A request goes through selection first; only the top-ranked provider is
//! negotiated with, unless [`BrokerConfig::fallback`] is set.

pub mod api;
mod broker;
mod config;
mod model;
pub mod store;

pub use broker::{Broker, BrokerError};
pub use config::{BrokerConfig, ConfigError, DATA_DIR_ENV};
pub use model::{ConsumerProfile, NegotiationAttempt, ProviderRecord, RankedProvider, Ranking, SessionRecord};
