use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{MonitorError, SampleStore, Series, SeriesPoint};
use crate::sla::Sla;

/// One hour.
pub const DEFAULT_BUCKET_MS: i64 = 3_600_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Transform {
    Identity,
    Scale { factor: f64 },
    /// Heartbeat samples become an availability fraction per bucket; a gap
    /// between consecutive heartbeats longer than the threshold counts as
    /// downtime for its whole length.
    UptimeFromHeartbeat { gap_threshold_ms: i64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappingRule {
    pub metric_name: String,
    pub indicator: String,
    pub transform: Transform,
}

/// Resource metric → SLA indicator rules.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<MappingRule>", into = "Vec<MappingRule>")]
pub struct MetricMapping {
    rules: Vec<MappingRule>,
}

impl MetricMapping {
    pub fn new(rules: Vec<MappingRule>) -> Result<Self, MonitorError> {
        let mut seen = BTreeSet::new();
        for rule in &rules {
            if !seen.insert(rule.indicator.as_str()) {
                return Err(MonitorError::DuplicateIndicator(rule.indicator.clone()));
            }
            let bad = match rule.transform {
                Transform::Scale { factor } => (!factor.is_finite()).then_some("scale factor must be finite"),
                Transform::UptimeFromHeartbeat { gap_threshold_ms } => {
                    (gap_threshold_ms <= 0).then_some("gap threshold must be positive")
                }
                Transform::Identity => None,
            };
            if let Some(detail) = bad {
                return Err(MonitorError::InvalidTransform { indicator: rule.indicator.clone(), detail: detail.into() });
            }
        }
        Ok(Self { rules })
    }

    /// Identity rules reading each SLO indicator from a metric of the same
    /// name.
    pub fn identity_for(sla: &Sla) -> Self {
        let mut seen = BTreeSet::new();
        let rules = sla
            .slos
            .iter()
            .filter(|s| seen.insert(s.indicator.clone()))
            .map(|s| MappingRule { metric_name: s.indicator.clone(), indicator: s.indicator.clone(), transform: Transform::Identity })
            .collect();
        Self { rules }
    }

    pub fn rules(&self) -> &[MappingRule] {
        &self.rules
    }

    pub fn rule_for(&self, indicator: &str) -> Option<&MappingRule> {
        self.rules.iter().find(|r| r.indicator == indicator)
    }
}

impl TryFrom<Vec<MappingRule>> for MetricMapping {
    type Error = MonitorError;

    fn try_from(rules: Vec<MappingRule>) -> Result<Self, Self::Error> {
        Self::new(rules)
    }
}

impl From<MetricMapping> for Vec<MappingRule> {
    fn from(m: MetricMapping) -> Self {
        m.rules
    }
}

fn heartbeat_availability(beats: &[i64], gap_threshold_ms: i64, bucket_ms: i64) -> Series {
    let (Some(&first), Some(&last)) = (beats.first(), beats.last()) else {
        return Vec::new();
    };
    let down: Vec<(i64, i64)> = beats
        .windows(2)
        .filter(|w| w[1] - w[0] > gap_threshold_ms)
        .map(|w| (w[0], w[1]))
        .collect();
    let mut series = Vec::new();
    let mut bucket_start = first.div_euclid(bucket_ms) * bucket_ms;
    while bucket_start <= last {
        let bucket_end = bucket_start + bucket_ms;
        let downtime: i64 = down
            .iter()
            .map(|&(a, b)| (b.min(bucket_end) - a.max(bucket_start)).max(0))
            .sum();
        series.push(SeriesPoint { timestamp_ms: bucket_start, value: 1.0 - downtime as f64 / bucket_ms as f64 });
        bucket_start = bucket_end;
    }
    series
}

fn apply(rule: &MappingRule, store: &SampleStore, bucket_ms: i64) -> Series {
    let samples = store.metric(&rule.metric_name);
    match rule.transform {
        Transform::Identity => samples.map(|(t, v)| SeriesPoint { timestamp_ms: t, value: v }).collect(),
        Transform::Scale { factor } => samples.map(|(t, v)| SeriesPoint { timestamp_ms: t, value: v * factor }).collect(),
        Transform::UptimeFromHeartbeat { gap_threshold_ms } => {
            let mut beats: Vec<i64> = samples.map(|(t, _)| t).collect();
            beats.dedup();
            heartbeat_availability(&beats, gap_threshold_ms, bucket_ms.max(1))
        }
    }
}

/// Series for one indicator.
pub fn series_for(mapping: &MetricMapping, store: &SampleStore, indicator: &str, bucket_ms: i64) -> Result<Series, MonitorError> {
    let rule = mapping.rule_for(indicator).ok_or_else(|| MonitorError::UnmappedIndicator(indicator.to_owned()))?;
    Ok(apply(rule, store, bucket_ms))
}

/// One series per mapped indicator.
pub fn map_metrics(mapping: &MetricMapping, store: &SampleStore, bucket_ms: i64) -> BTreeMap<String, Series> {
    mapping.rules.iter().map(|r| (r.indicator.clone(), apply(r, store, bucket_ms))).collect()
}
