#![allow(dead_code)]

use slabroker_core::qos::read_offers_csv;
use slabroker_core::sla::SlaRequestDoc;
use slabroker_service::{Broker, BrokerConfig, ProviderRecord};

pub const OFFERS_CSV: &str = include_str!("../../../core/fixtures/offers.csv");
pub const REFERENCE_REQUEST_JSON: &str = include_str!("../../../core/fixtures/reference_request.json");
pub const PM_REQUEST_XML: &str = include_str!("../../../core/fixtures/pm_request.xml");

pub fn fleet() -> Vec<ProviderRecord> {
    read_offers_csv::<f64, _>(OFFERS_CSV.as_bytes())
        .unwrap()
        .into_iter()
        .map(|offer| ProviderRecord {
            offer,
            best_offer: None,
            template_bounds: Default::default(),
            strategy: Default::default(),
            live: true,
        })
        .collect()
}

pub fn request() -> SlaRequestDoc {
    serde_json::from_str(REFERENCE_REQUEST_JSON).unwrap()
}

pub fn broker_with_fleet(dir: &std::path::Path, config: BrokerConfig) -> Broker {
    let broker = Broker::open(dir, config).unwrap();
    for record in fleet() {
        broker.register_provider(record, false).unwrap();
    }
    broker
}

/// JSON-lines feed of `ok` samples at `good` and `total − ok` at `bad`.
pub fn feed(metric: &str, ok: usize, total: usize, good: f64, bad: f64) -> String {
    (0..total)
        .map(|i| {
            let v = if i < ok { good } else { bad };
            format!("{{\"timestamp\":{},\"metric_name\":\"{metric}\",\"value\":{v},\"source_id\":\"probe\"}}\n", i * 1000)
        })
        .collect()
}
