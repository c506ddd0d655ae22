//! File loading with the path in every error.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use slabroker_core::qos::{read_offers_csv, read_offers_json, Offer};
use slabroker_core::sla::{parse_sla_request_xml, SlaRequestDoc};

fn has_extension(path: &Path, ext: &str) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case(ext))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(BufReader::new(file))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot open {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("{}: invalid JSON", path.display()))
}

/// Offers from CSV, or JSON when the file ends in `.json`.
pub fn offers(path: &Path) -> Result<Vec<Offer<f64>>> {
    let reader = open(path)?;
    let offers = if has_extension(path, "json") { read_offers_json(reader) } else { read_offers_csv(reader) };
    let offers = offers.with_context(|| format!("{}: cannot read offers", path.display()))?;
    if offers.is_empty() {
        bail!("{}: no offers", path.display());
    }
    Ok(offers)
}

/// Requirement document from XML, or JSON when the file ends in `.json`.
pub fn request(path: &Path) -> Result<SlaRequestDoc> {
    if has_extension(path, "json") {
        let doc: SlaRequestDoc = read_json(path)?;
        doc.validate().with_context(|| format!("{}: invalid request", path.display()))?;
        Ok(doc)
    } else {
        let bytes = std::fs::read(path).with_context(|| format!("cannot open {}", path.display()))?;
        parse_sla_request_xml(&bytes).with_context(|| format!("{}: invalid request", path.display()))
    }
}

/// `a=1,b=2` pairs.
pub fn named_values(spec: &str) -> Result<Vec<(String, f64)>> {
    spec.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| {
            let (name, value) = pair.split_once('=').with_context(|| format!("expected name=value, got `{pair}`"))?;
            let value: f64 = value.trim().parse().with_context(|| format!("`{value}` is not a number"))?;
            Ok((name.trim().to_owned(), value))
        })
        .collect()
}
