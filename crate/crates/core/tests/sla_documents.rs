mod support;

use chrono::{TimeZone, Utc};
use proptest::prelude::*;
use slabroker_core::negotiation::{
    run_negotiation, Concession, MessageKind, NegotiationSession, Party, ProposalMessage, SessionConfig, Terms,
    UtilityParams, AttributeUtility, Counterparty, NegotiationError,
};
use slabroker_core::qos::Direction;
use slabroker_core::sla::{
    build_agreement, denormalize_terms, normalize_value, parse_sla_request_xml, to_requirement, write_sla_request_xml,
    AgreementDefaults, Comparator, DirectionRegistry, QosRequirementEntry, SlaError, SlaRequestDoc, TermScale,
};
use slabroker_core::Requirement64;
use support::PM_REQUEST_XML;

fn pm_request() -> SlaRequestDoc {
    parse_sla_request_xml(PM_REQUEST_XML.as_bytes()).unwrap()
}

#[test]
fn pm_request_parses_verbatim() {
    let doc = pm_request();
    assert_eq!(doc.service_name, "ProjectManagementService");
    let names: Vec<&str> = doc.entries.iter().map(|e| e.name.as_str()).collect();
    assert_eq!(names, ["Availability", "Response-time", "Reliability", "Cost"]);
    let weights: Vec<f64> = doc.entries.iter().map(|e| e.weight).collect();
    assert_eq!(weights, [0.3, 0.2, 0.3, 0.2]);
    let preferred: Vec<f64> = doc.entries.iter().map(|e| e.preferred_value).collect();
    assert_eq!(preferred, [99.998, 2.0, 99.996, 20.0]);
    let a = doc.entry("Availability").unwrap();
    assert_eq!((a.min_value, a.max_value, a.unit.as_str()), (97.0, 100.0, "percentage"));
}

#[test]
fn pm_request_round_trip_is_a_fixed_point() {
    let doc = pm_request();
    let once = write_sla_request_xml(&doc);
    let reparsed = parse_sla_request_xml(once.as_bytes()).unwrap();
    assert_eq!(reparsed, doc);
    assert_eq!(write_sla_request_xml(&reparsed), once);
}

#[test]
fn inverted_range_is_rejected() {
    let bad = PM_REQUEST_XML.replacen("<min-value>97</min-value>", "<min-value>99</min-value>", 1).replacen(
        "<max-value>100</max-value>",
        "<max-value>98</max-value>",
        1,
    );
    assert!(matches!(parse_sla_request_xml(bad.as_bytes()), Err(SlaError::Range { .. })));
}

#[test]
fn unbalanced_weights_are_rejected() {
    let bad = PM_REQUEST_XML.replacen("<weight>0.3</weight>", "<weight>0.4</weight>", 1);
    assert!(matches!(parse_sla_request_xml(bad.as_bytes()), Err(SlaError::WeightSum { .. })));
}

#[test]
fn broken_markup_is_a_syntax_error() {
    let bad = PM_REQUEST_XML.replace("</QoSAttributes>", "");
    assert!(parse_sla_request_xml(bad.as_bytes()).is_err());
}

#[test]
fn pm_request_requirement_and_directions() {
    let (req, specs): (Requirement64, _) = to_requirement(&pm_request(), &DirectionRegistry::default()).unwrap();
    assert_eq!(req.values["Availability"], 99.998);
    assert_eq!(req.values["Response-time"], 2.0);
    assert_eq!(req.values["Reliability"], 99.996);
    assert_eq!(req.values["Cost"], 20.0);
    let dir = |n: &str| specs.iter().find(|s| s.name == n).unwrap().direction;
    assert_eq!(dir("Cost"), Direction::CostDriven);
    assert_eq!(dir("Response-time"), Direction::CostDriven);
    assert_eq!(dir("Availability"), Direction::UtilityDriven);
}

#[test]
fn unknown_attribute_needs_a_registry_entry() {
    let xml = PM_REQUEST_XML.replace("<name>Cost</name>", "<name>Karma</name>");
    let doc = parse_sla_request_xml(xml.as_bytes()).unwrap();
    let err = to_requirement::<f64>(&doc, &DirectionRegistry::default()).unwrap_err();
    assert!(matches!(err, SlaError::UnknownAttributeDirection(_)));
    let registry = DirectionRegistry::default().with("Karma", Direction::UtilityDriven);
    assert!(to_requirement::<f64>(&doc, &registry).is_ok());
}

#[test]
fn denormalize_examples() {
    let doc = pm_request();
    let reg = DirectionRegistry::default();
    let terms = [("Availability".to_string(), 1.0), ("Response-time".to_string(), 1.0), ("Cost".to_string(), 0.5)]
        .into_iter()
        .collect();
    let raw = denormalize_terms(&terms, &doc, &reg).unwrap();
    assert_eq!(raw["Availability"], 100.0);
    assert_eq!(raw["Response-time"], 1.0);
    assert!((raw["Cost"] - 20.5).abs() < 1e-12);
}

/// Plays back fixed proposals, acknowledging any confirmation.
struct Fixed(Vec<Terms<f64>>);

impl Counterparty<f64> for Fixed {
    fn receive(&mut self, m: &ProposalMessage<f64>) -> Result<Option<ProposalMessage<f64>>, NegotiationError> {
        match m.kind {
            MessageKind::SlaConfirmation => Ok(Some(ProposalMessage::control(MessageKind::SlaConfirmation, Party::Provider, m.round)?)),
            MessageKind::SlaRequest | MessageKind::CounterProposal => {
                let i = (m.round as usize).min(self.0.len() - 1);
                Ok(Some(ProposalMessage::with_terms(MessageKind::Proposal, Party::Provider, m.round + 1, self.0[i].clone())?))
            }
            _ => Ok(None),
        }
    }
}

fn concluded(terms: Terms<f64>, threshold: f64) -> NegotiationSession<f64> {
    let attrs = terms
        .keys()
        .map(|name| {
            let dir = DirectionRegistry::default().direction_of(name).unwrap();
            AttributeUtility::new(name.clone(), dir, 0.0, 1.0, 1.0 / terms.len() as f64)
        })
        .collect();
    let params = UtilityParams::new(attrs).unwrap();
    let config = SessionConfig { threshold, max_rounds: 3, concession: Concession::Constant, ideal: None };
    let mut session = NegotiationSession::new("t1", params, config).unwrap();
    let ideal = session.params().ideal_terms();
    run_negotiation(&mut session, ideal, &mut Fixed(vec![terms])).unwrap();
    session
}

fn now() -> chrono::DateTime<Utc> {
    Utc.with_ymd_and_hms(2026, 1, 1, 0, 0, 0).unwrap()
}

#[test]
fn agreed_availability_becomes_an_slo() {
    let terms: Terms<f64> = [("Availability".to_string(), 0.95)].into_iter().collect();
    let session = concluded(terms, 0.5);
    let sla = build_agreement(&session, &pm_request(), 24.into(), &DirectionRegistry::default(), &AgreementDefaults::default(), now())
        .unwrap();
    let slo = sla.slo("Availability").unwrap();
    assert!((slo.target - 99.85).abs() < 1e-9);
    assert_eq!(slo.comparator, Comparator::AtLeast);
    assert_eq!(slo.percentile, 95.0);
    assert_eq!(slo.window_secs, 30 * 24 * 3600);
    assert_eq!(sla.parties.provider_id, 24.into());
}

#[test]
fn failed_session_yields_no_agreement() {
    let terms: Terms<f64> = [("Availability".to_string(), 0.1)].into_iter().collect();
    let session = concluded(terms, 0.9);
    let err = build_agreement(&session, &pm_request(), 24.into(), &DirectionRegistry::default(), &AgreementDefaults::default(), now());
    assert!(matches!(err, Err(SlaError::NotAgreed)));
}

#[test]
fn two_terms_two_slos() {
    let terms: Terms<f64> = [("Availability".to_string(), 0.9), ("Cost".to_string(), 0.2)].into_iter().collect();
    let session = concluded(terms, 0.5);
    let sla = build_agreement(&session, &pm_request(), 3.into(), &DirectionRegistry::default(), &AgreementDefaults::default(), now())
        .unwrap();
    assert_eq!(sla.slos.len(), 2);
    assert!(sla.penalties.iter().all(|p| p.slo_index < sla.slos.len()));
    assert_eq!(sla.slo("Cost").unwrap().comparator, Comparator::AtMost);
    assert!((sla.cost.amount - (1.0 + 0.2 * 39.0)).abs() < 1e-9);
}

fn entry_strategy() -> impl Strategy<Value = (f64, f64)> {
    (-1e4..1e4f64, 1e-3..1e4f64).prop_map(|(lo, width)| (lo, lo + width))
}

proptest! {
    #[test]
    fn denormalize_inverts_normalize((lo, hi) in entry_strategy(), f in 0.0..=1.0f64, cost in any::<bool>()) {
        let raw = lo + f * (hi - lo);
        let name = if cost { "Cost" } else { "Availability" };
        let entry = QosRequirementEntry { name: name.into(), min_value: lo, max_value: hi, preferred_value: lo, unit: String::new(), weight: 1.0 };
        let doc = SlaRequestDoc { service_name: "s".into(), consumer_id: None, entries: vec![entry.clone()] };
        let reg = DirectionRegistry::default();
        let dir = reg.direction_of(name).unwrap();
        let level = normalize_value(raw, &entry, dir, TermScale::Satisfaction);
        let back = denormalize_terms(&[(name.to_string(), level)].into_iter().collect(), &doc, &reg).unwrap();
        prop_assert!((back[name] - raw).abs() <= 1e-9 * (1.0 + raw.abs().max(hi.abs())));
    }

    #[test]
    fn agreements_always_validate(
        avail in 0.0..=1.0f64,
        cost in 0.0..=1.0f64,
        rt in 0.0..=1.0f64,
        keep_rt in any::<bool>(),
    ) {
        let mut terms: Terms<f64> = [("Availability".to_string(), avail), ("Cost".to_string(), cost)].into_iter().collect();
        if keep_rt {
            terms.insert("Response-time".into(), rt);
        }
        let n = terms.len();
        let session = concluded(terms, 0.0);
        let sla = build_agreement(&session, &pm_request(), 7.into(), &DirectionRegistry::default(), &AgreementDefaults::default(), now()).unwrap();
        prop_assert!(sla.validate().is_ok());
        prop_assert_eq!(sla.slos.len(), n);
        prop_assert!(sla.validity.start < sla.validity.end);
        for slo in &sla.slos {
            let e = pm_request().entry(&slo.indicator).cloned().unwrap();
            prop_assert!(slo.target >= e.min_value - 1e-9 && slo.target <= e.max_value + 1e-9);
        }
    }

    #[test]
    fn xml_round_trip_on_generated_docs(
        ranges in prop::collection::vec(entry_strategy(), 1..5),
        raw_weights in prop::collection::vec(1u32..100, 5),
    ) {
        let n = ranges.len();
        let total: u32 = raw_weights[..n].iter().sum();
        let names = ["Availability", "Reliability", "Cost", "Response-time", "Throughput"];
        let mut entries: Vec<QosRequirementEntry> = ranges.iter().enumerate().map(|(i, (lo, hi))| QosRequirementEntry {
            name: names[i].into(),
            min_value: *lo,
            max_value: *hi,
            preferred_value: (lo + hi) / 2.0,
            unit: "u & <v>".into(),
            weight: f64::from(raw_weights[i]) / f64::from(total),
        }).collect();
        let rest: f64 = entries[1..].iter().map(|e| e.weight).sum();
        entries[0].weight = 1.0 - rest;
        let doc = SlaRequestDoc { service_name: "Svc".into(), consumer_id: Some("c\"1".into()), entries };
        let xml = write_sla_request_xml(&doc);
        let parsed = parse_sla_request_xml(xml.as_bytes()).unwrap();
        prop_assert_eq!(&parsed, &doc);
        prop_assert_eq!(write_sla_request_xml(&parsed), xml);
    }
}
