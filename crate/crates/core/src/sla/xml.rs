use std::collections::BTreeMap;
use std::fmt::Write as _;

use quick_xml::escape::escape;
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use super::{QosRequirementEntry, SlaError, SlaRequestDoc};

const FIELDS: [&str; 6] = ["name", "min-value", "max-value", "preferred-value", "unit", "weight"];

fn syntax(e: impl std::fmt::Display) -> SlaError {
    SlaError::XmlSyntax(e.to_string())
}

fn attribute(start: &BytesStart<'_>, key: &[u8]) -> Result<Option<String>, SlaError> {
    for attr in start.attributes() {
        let attr = attr.map_err(syntax)?;
        if attr.key.as_ref() == key {
            return Ok(Some(attr.unescape_value().map_err(syntax)?.into_owned()));
        }
    }
    Ok(None)
}

fn build_entry(index: usize, mut fields: BTreeMap<String, String>) -> Result<QosRequirementEntry, SlaError> {
    let name = fields
        .remove("name")
        .filter(|n| !n.is_empty())
        .ok_or_else(|| SlaError::Schema(format!("QoSAttribute #{} has no `name`", index + 1)))?;
    let mut number = |field: &str| -> Result<f64, SlaError> {
        let raw = fields
            .remove(field)
            .ok_or_else(|| SlaError::Schema(format!("QoSAttribute `{name}` has no `{field}`")))?;
        raw.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| SlaError::Schema(format!("`{field}` of `{name}` is not a number: `{raw}`")))
    };
    let min_value = number("min-value")?;
    let max_value = number("max-value")?;
    let preferred_value = number("preferred-value")?;
    let weight = number("weight")?;
    let unit = fields.remove("unit").unwrap_or_default();
    Ok(QosRequirementEntry { name, min_value, max_value, preferred_value, unit, weight })
}

/// Parses a quality-requirements document of the form
/// `<service name=".."><QoSAttributes><QoSAttribute>..</QoSAttribute>..`.
///
/// The optional `consumer` attribute on `service` fills
/// [`SlaRequestDoc::consumer_id`]. Unknown elements are ignored.
pub fn parse_sla_request_xml(document: &[u8]) -> Result<SlaRequestDoc, SlaError> {
    let mut reader = Reader::from_reader(document);
    reader.config_mut().trim_text(true);

    let mut path: Vec<String> = Vec::new();
    let mut service_name: Option<String> = None;
    let mut consumer_id = None;
    let mut saw_attribute_list = false;
    let mut entries = Vec::new();
    let mut current: Option<BTreeMap<String, String>> = None;
    let mut text = String::new();
    let mut buf = Vec::new();

    loop {
        let event = reader.read_event_into(&mut buf).map_err(|e| {
            SlaError::XmlSyntax(format!("at byte {}: {e}", reader.buffer_position()))
        })?;
        match event {
            Event::Start(start) => {
                let name = String::from_utf8_lossy(start.name().as_ref()).into_owned();
                match (path.iter().map(String::as_str).collect::<Vec<_>>().as_slice(), name.as_str()) {
                    ([], "service") => {
                        service_name = Some(attribute(&start, b"name")?.unwrap_or_default());
                        consumer_id = attribute(&start, b"consumer")?;
                    }
                    ([], other) => return Err(SlaError::Schema(format!("root element is `{other}`, expected `service`"))),
                    (["service"], "QoSAttributes") => saw_attribute_list = true,
                    (["service", "QoSAttributes"], "QoSAttribute") => current = Some(BTreeMap::new()),
                    _ => {}
                }
                path.push(name);
                text.clear();
            }
            Event::Empty(start) if path.is_empty() => {
                let name = String::from_utf8_lossy(start.name().as_ref()).into_owned();
                return Err(SlaError::Schema(format!("root element `{name}` is empty")));
            }
            Event::Text(t) => text.push_str(&t.unescape().map_err(syntax)?),
            Event::CData(t) => text.push_str(&String::from_utf8_lossy(&t)),
            Event::End(_) => {
                let closed = path.pop().unwrap_or_default();
                if path.len() == 3 && path[2] == "QoSAttribute" && FIELDS.contains(&closed.as_str()) {
                    if let Some(fields) = current.as_mut() {
                        fields.insert(closed, text.trim().to_owned());
                    }
                } else if closed == "QoSAttribute" && path.len() == 2 {
                    let fields = current.take().unwrap_or_default();
                    entries.push(build_entry(entries.len(), fields)?);
                }
                text.clear();
            }
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }

    let service_name = service_name.ok_or_else(|| SlaError::Schema("missing `service` element".into()))?;
    if !saw_attribute_list {
        return Err(SlaError::Schema("`service` has no `QoSAttributes` element".into()));
    }
    let doc = SlaRequestDoc { service_name, consumer_id, entries };
    doc.validate()?;
    Ok(doc)
}

/// Canonical XML rendering of a request; parsing it back yields the same
/// document.
pub fn write_sla_request_xml(doc: &SlaRequestDoc) -> String {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = write!(out, "<service name=\"{}\"", escape(doc.service_name.as_str()));
    if let Some(consumer) = &doc.consumer_id {
        let _ = write!(out, " consumer=\"{}\"", escape(consumer.as_str()));
    }
    out.push_str(">\n  <QoSAttributes>\n");
    for e in &doc.entries {
        out.push_str("    <QoSAttribute>\n");
        let _ = writeln!(out, "      <name>{}</name>", escape(e.name.as_str()));
        let _ = writeln!(out, "      <min-value>{}</min-value>", e.min_value);
        let _ = writeln!(out, "      <max-value>{}</max-value>", e.max_value);
        let _ = writeln!(out, "      <preferred-value>{}</preferred-value>", e.preferred_value);
        let _ = writeln!(out, "      <unit>{}</unit>", escape(e.unit.as_str()));
        let _ = writeln!(out, "      <weight>{}</weight>", e.weight);
        out.push_str("    </QoSAttribute>\n");
    }
    out.push_str("  </QoSAttributes>\n</service>\n");
    out
}
