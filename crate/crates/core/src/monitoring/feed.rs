use std::collections::BTreeMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

/// One measurement from a monitoring feed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSample {
    /// Epoch milliseconds.
    pub timestamp: i64,
    pub metric_name: String,
    pub value: f64,
    pub source_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MalformedRecord {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub accepted: usize,
    pub duplicates: usize,
    pub malformed: Vec<MalformedRecord>,
}

type SampleKey = (i64, String, String);

/// Samples ordered by timestamp, unique per (timestamp, metric, source).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<MetricSample>", into = "Vec<MetricSample>")]
pub struct SampleStore {
    samples: BTreeMap<SampleKey, f64>,
}

impl SampleStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns `false` if a sample with the same key is already stored; the
    /// first value wins.
    pub fn insert(&mut self, sample: MetricSample) -> bool {
        let key = (sample.timestamp, sample.metric_name, sample.source_id);
        if self.samples.contains_key(&key) {
            return false;
        }
        self.samples.insert(key, sample.value);
        true
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = MetricSample> + '_ {
        self.samples.iter().map(|((timestamp, metric_name, source_id), value)| MetricSample {
            timestamp: *timestamp,
            metric_name: metric_name.clone(),
            value: *value,
            source_id: source_id.clone(),
        })
    }

    /// `(timestamp, value)` pairs of one metric, in time order.
    pub fn metric(&self, name: &str) -> impl Iterator<Item = (i64, f64)> + '_ {
        let name = name.to_owned();
        self.samples.iter().filter(move |((_, m, _), _)| *m == name).map(|((t, _, _), v)| (*t, *v))
    }

    /// Adds every well-formed JSON line from `reader`. Blank lines are
    /// skipped; malformed ones are counted and otherwise ignored.
    pub fn ingest<R: BufRead>(&mut self, reader: R) -> IngestReport {
        let mut report = IngestReport::default();
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = match line {
                Ok(l) => l,
                Err(e) => {
                    report.malformed.push(MalformedRecord { line: line_no, reason: e.to_string() });
                    continue;
                }
            };
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<MetricSample>(&line) {
                Ok(sample) if !sample.value.is_finite() => {
                    report.malformed.push(MalformedRecord { line: line_no, reason: "non-finite value".into() })
                }
                Ok(sample) => {
                    if self.insert(sample) {
                        report.accepted += 1;
                    } else {
                        report.duplicates += 1;
                    }
                }
                Err(e) => report.malformed.push(MalformedRecord { line: line_no, reason: e.to_string() }),
            }
        }
        report
    }
}

impl From<Vec<MetricSample>> for SampleStore {
    fn from(samples: Vec<MetricSample>) -> Self {
        let mut store = SampleStore::new();
        for s in samples {
            store.insert(s);
        }
        store
    }
}

impl From<SampleStore> for Vec<MetricSample> {
    fn from(store: SampleStore) -> Self {
        store.iter().collect()
    }
}

/// Ingests a whole feed into a fresh store.
pub fn ingest<R: BufRead>(reader: R) -> (SampleStore, IngestReport) {
    let mut store = SampleStore::new();
    let report = store.ingest(reader);
    (store, report)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FEED: &str = r#"{"timestamp":3000,"metric_name":"rt","value":9,"source_id":"probe-a"}
{"timestamp":1000,"metric_name":"rt","value":8,"source_id":"probe-a"}
{"timestamp":2000,"metric_name":"rt","value":12,"source_id":"probe-a"}
"#;

    #[test]
    fn stores_sorted_samples() {
        let (store, report) = ingest(FEED.as_bytes());
        assert_eq!(store.len(), 3);
        assert_eq!(report.accepted, 3);
        assert_eq!(store.metric("rt").map(|(_, v)| v).collect::<Vec<_>>(), [8.0, 12.0, 9.0]);
    }

    #[test]
    fn duplicates_are_dropped() {
        let feed = format!("{FEED}{{\"timestamp\":1000,\"metric_name\":\"rt\",\"value\":99,\"source_id\":\"probe-a\"}}\n");
        let (store, report) = ingest(feed.as_bytes());
        assert_eq!(store.len(), 3);
        assert_eq!(report.duplicates, 1);
        assert_eq!(store.metric("rt").next(), Some((1000, 8.0)));
    }

    #[test]
    fn malformed_lines_are_counted() {
        let feed = format!("{FEED}\n{{\"timestamp\":4000,\"metric_name\":\"rt\",\"value\":\"fast\",\"source_id\":\"p\"}}\n");
        let (store, report) = ingest(feed.as_bytes());
        assert_eq!(store.len(), 3);
        assert_eq!(report.malformed.len(), 1);
        assert_eq!(report.malformed[0].line, 5);
    }
}
