use std::collections::BTreeMap;
use std::io::{Read, Write};

use thiserror::Error;

use super::{Offer, ProviderId};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("offers CSV needs a `provider_id` first column followed by attribute columns")]
    BadHeader,
    #[error("line {line}: duplicate provider `{id}`")]
    DuplicateProvider { line: u64, id: String },
    #[error("invalid offers JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Reads offers from CSV with header `provider_id,<attr1>,<attr2>,...`.
pub fn read_offers_csv<T: Scalar, R: Read>(reader: R) -> Result<Vec<Offer<T>>, DatasetError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.len() < 2 || !header[0].eq_ignore_ascii_case("provider_id") {
        return Err(DatasetError::BadHeader);
    }
    let attributes: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();

    let mut offers: Vec<Offer<T>> = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let id = ProviderId::new(&record[0]);
        if offers.iter().any(|o| o.provider_id == id) {
            return Err(DatasetError::DuplicateProvider { line, id: id.to_string() });
        }
        let mut values = BTreeMap::new();
        for (name, field) in attributes.iter().zip(record.iter().skip(1)) {
            let value: f64 = field.parse().map_err(|_| DatasetError::Parse {
                line,
                message: format!("`{field}` is not a number (column `{name}`)"),
            })?;
            if !value.is_finite() {
                return Err(DatasetError::Parse { line, message: format!("non-finite value in column `{name}`") });
            }
            values.insert(name.clone(), T::lit(value));
        }
        offers.push(Offer { provider_id: id, values });
    }
    Ok(offers)
}

/// Reads a JSON array of `{"provider_id": .., "values": {..}}` objects.
pub fn read_offers_json<T: Scalar, R: Read>(reader: R) -> Result<Vec<Offer<T>>, DatasetError> {
    Ok(serde_json::from_reader(reader)?)
}

/// Writes offers back as CSV, columns in `attributes` order.
pub fn write_offers_csv<T: Scalar, W: Write>(
    writer: W,
    attributes: &[String],
    offers: &[Offer<T>],
) -> Result<(), DatasetError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(std::iter::once("provider_id").chain(attributes.iter().map(String::as_str)))?;
    for offer in offers {
        let mut row = vec![offer.provider_id.to_string()];
        row.extend(attributes.iter().map(|a| offer.values.get(a).map_or(String::new(), |v| v.to_string())));
        w.write_record(&row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_csv() {
        let data = "provider_id,Availability,Cost\n1,0.99988,16.1\n2, 0.99968 ,38.1\n";
        let offers: Vec<Offer<f64>> = read_offers_csv(data.as_bytes()).unwrap();
        assert_eq!(offers.len(), 2);
        assert_eq!(offers[1].values["Availability"], 0.99968);
        assert_eq!(offers[0].provider_id.as_str(), "1");
    }

    #[test]
    fn reports_line_of_bad_value() {
        let data = "provider_id,a\n1,0.5\n2,abc\n";
        match read_offers_csv::<f64, _>(data.as_bytes()) {
            Err(DatasetError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_header_and_duplicates() {
        assert!(matches!(read_offers_csv::<f64, _>("id,a\n1,2\n".as_bytes()), Err(DatasetError::BadHeader)));
        assert!(matches!(
            read_offers_csv::<f64, _>("provider_id,a\n1,2\n1,3\n".as_bytes()),
            Err(DatasetError::DuplicateProvider { line: 3, .. })
        ));
    }

    #[test]
    fn csv_and_json_agree() {
        let csv_data = "provider_id,a,b\n7,1.5,2\n";
        let json_data = r#"[{"provider_id":"7","values":{"a":1.5,"b":2.0}}]"#;
        let from_csv: Vec<Offer<f64>> = read_offers_csv(csv_data.as_bytes()).unwrap();
        let from_json: Vec<Offer<f64>> = read_offers_json(json_data.as_bytes()).unwrap();
        assert_eq!(from_csv, from_json);

        let mut out = Vec::new();
        write_offers_csv(&mut out, &["a".into(), "b".into()], &from_csv).unwrap();
        let back: Vec<Offer<f64>> = read_offers_csv(out.as_slice()).unwrap();
        assert_eq!(back, from_csv);
    }
}
