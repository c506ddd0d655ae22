use std::collections::BTreeMap;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::{MonitorError, Series, TimeWindow};
use crate::sla::{Sla, Slo};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum SloStatus {
    Compliant,
    Violated,
    /// No samples in the window. Never treated as a violation.
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct SloResult {
    pub slo: Slo,
    pub status: SloStatus,
    pub compliant: bool,
    /// Share of samples meeting the target; absent when indeterminate.
    pub achieved_fraction: Option<f64>,
    pub sample_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct Violation {
    pub slo_index: usize,
    pub indicator: String,
    pub window: TimeWindow,
    /// `percentile/100 − achieved_fraction`.
    pub shortfall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct ComplianceReport {
    pub sla_id: String,
    pub window: TimeWindow,
    pub slos: Vec<SloResult>,
    pub violations: Vec<Violation>,
}

impl ComplianceReport {
    pub fn all_compliant(&self) -> bool {
        self.slos.iter().all(|r| r.status == SloStatus::Compliant)
    }
}

/// Evaluates every SLO of `sla` over the samples of its indicator that
/// fall inside `window`.
///
/// An SLO is met when the share of samples satisfying
/// `value comparator target` reaches `percentile/100`.
pub fn evaluate_compliance(
    sla: &Sla,
    series: &BTreeMap<String, Series>,
    window: TimeWindow,
) -> Result<ComplianceReport, MonitorError> {
    TimeWindow::new(window.start_ms, window.end_ms)?;
    let mut slos = Vec::with_capacity(sla.slos.len());
    let mut violations = Vec::new();

    for (index, slo) in sla.slos.iter().enumerate() {
        let (mut total, mut satisfied) = (0usize, 0usize);
        for p in series.get(&slo.indicator).into_iter().flatten().filter(|p| window.contains(p.timestamp_ms)) {
            total += 1;
            if slo.comparator.holds(p.value, slo.target) {
                satisfied += 1;
            }
        }
        let result = if total == 0 {
            SloResult { slo: slo.clone(), status: SloStatus::Indeterminate, compliant: false, achieved_fraction: None, sample_count: 0 }
        } else {
            let achieved = satisfied as f64 / total as f64;
            // compare in counts so 95 of 100 meets a 95th percentile exactly
            let compliant = satisfied as f64 * 100.0 >= slo.percentile * total as f64;
            if !compliant {
                violations.push(Violation {
                    slo_index: index,
                    indicator: slo.indicator.clone(),
                    window,
                    shortfall: slo.percentile / 100.0 - achieved,
                });
            }
            SloResult {
                slo: slo.clone(),
                status: if compliant { SloStatus::Compliant } else { SloStatus::Violated },
                compliant,
                achieved_fraction: Some(achieved),
                sample_count: total,
            }
        };
        slos.push(result);
    }

    Ok(ComplianceReport { sla_id: sla.id.clone(), window, slos, violations })
}
