use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use slabroker_core::monitoring::{MappingRule, DEFAULT_BUCKET_MS};
use slabroker_core::negotiation::{Concession, DEFAULT_MAX_ROUNDS, DEFAULT_THRESHOLD};
use slabroker_core::qos::Direction;
use slabroker_core::sla::{AgreementDefaults, DirectionRegistry};

/// Environment variable naming the data directory.
pub const DATA_DIR_ENV: &str = "SLABROKER_DATA_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BrokerConfig {
    /// Used when a consumer profile sets none.
    pub threshold: f64,
    pub max_rounds: u32,
    /// Negotiate with the next-ranked provider after a failed session.
    pub fallback: bool,
    pub bucket_ms: i64,
    /// Broker-side counter-offer rule.
    pub concession: Concession<f64>,
    /// Sensitivities given to profiles created from a request.
    pub default_alpha: f64,
    pub default_beta: f64,
    /// Attributes every registered offer must carry; when empty, offers
    /// must match the attributes of those already registered.
    pub attributes: Vec<String>,
    /// Direction overrides on top of the built-in registry.
    pub directions: BTreeMap<String, Direction>,
    /// Metric rules that replace the identity mapping for an indicator.
    pub metric_mapping: Vec<MappingRule>,
    pub agreement: AgreementDefaults,
    /// Key-value policy assertions, stored and reported but not enforced.
    pub policies: BTreeMap<String, String>,
}

impl Default for BrokerConfig {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            max_rounds: DEFAULT_MAX_ROUNDS,
            fallback: false,
            bucket_ms: DEFAULT_BUCKET_MS,
            concession: Concession::default(),
            default_alpha: 0.0,
            default_beta: 1.0,
            attributes: Vec::new(),
            directions: BTreeMap::new(),
            metric_mapping: Vec::new(),
            agreement: AgreementDefaults::default(),
            policies: BTreeMap::new(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Parse { path: PathBuf, line: usize, column: usize, message: String },
    #[error("{0}")]
    Invalid(String),
}

impl BrokerConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_owned(), source })?;
        let config: Self = serde_json::from_str(&text).map_err(|e| ConfigError::Parse {
            path: path.to_owned(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(ConfigError::Invalid(format!("threshold {} outside [0,1]", self.threshold)));
        }
        if self.max_rounds == 0 {
            return Err(ConfigError::Invalid("max_rounds must be at least 1".into()));
        }
        if self.bucket_ms <= 0 {
            return Err(ConfigError::Invalid("bucket_ms must be positive".into()));
        }
        if !(self.default_alpha >= 0.0 && self.default_beta >= 0.0) {
            return Err(ConfigError::Invalid("default sensitivities must be non-negative".into()));
        }
        self.concession.validate().map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn registry(&self) -> DirectionRegistry {
        let mut registry = DirectionRegistry::default();
        for (name, direction) in &self.directions {
            registry.insert(name, *direction);
        }
        registry
    }
}
