//! SLA compliance pipeline: metric feeds in, compliance reports out.
//!
//! Feeds are JSON lines (`timestamp` in epoch milliseconds, `metric_name`,
//! `value`, `source_id`). Samples may arrive in any order; the store keeps
//! them sorted and deduplicated. A [`MetricMapping`] turns raw metrics into
//! SLA indicator series, which [`evaluate_compliance`] checks against each
//! SLO over a window.

mod compliance;
mod feed;
mod mapping;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use compliance::{evaluate_compliance, ComplianceReport, SloResult, SloStatus, Violation};
pub use feed::{ingest, IngestReport, MalformedRecord, MetricSample, SampleStore};
pub use mapping::{map_metrics, series_for, MappingRule, MetricMapping, Transform, DEFAULT_BUCKET_MS};

/// Half-open time range `[start_ms, end_ms)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct TimeWindow {
    pub start_ms: i64,
    pub end_ms: i64,
}

impl TimeWindow {
    pub fn new(start_ms: i64, end_ms: i64) -> Result<Self, MonitorError> {
        if start_ms < end_ms {
            Ok(Self { start_ms, end_ms })
        } else {
            Err(MonitorError::InvalidWindow { start_ms, end_ms })
        }
    }

    pub fn contains(&self, t: i64) -> bool {
        self.start_ms <= t && t < self.end_ms
    }
}

/// One point of an SLA-indicator series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub timestamp_ms: i64,
    pub value: f64,
}

pub type Series = Vec<SeriesPoint>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MonitorError {
    #[error("no mapping rule produces indicator `{0}`")]
    UnmappedIndicator(String),
    #[error("indicator `{0}` is produced by more than one rule")]
    DuplicateIndicator(String),
    #[error("invalid transform for `{indicator}`: {detail}")]
    InvalidTransform { indicator: String, detail: String },
    #[error("window [{start_ms}, {end_ms}) is empty")]
    InvalidWindow { start_ms: i64, end_ms: i64 },
}
