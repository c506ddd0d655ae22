use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use slabroker_core::qos::{normalize, satisfaction_flags, select_best, topsis_rank, ProviderId, RankingTable};
use slabroker_core::sla::{to_requirement, DirectionRegistry};

use crate::inputs;
use crate::output::{self, Format};
use crate::OutputArgs;

#[derive(clap::Args)]
pub struct SelectArgs {
    /// Offers as CSV (`provider_id,<attribute>...`) or JSON.
    #[arg(long)]
    offers: PathBuf,
    /// Quality-requirement document, XML or JSON.
    #[arg(long)]
    request: PathBuf,
    /// Replace request weights, e.g. `Availability=0.3,Cost=0.2`.
    #[arg(long)]
    weights: Option<String>,
    /// Also rank with TOPSIS.
    #[arg(long)]
    topsis: bool,
    /// Add per-attribute flags: does the offer meet the requirement?
    #[arg(long)]
    report: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Serialize, Deserialize, JsonSchema)]
pub struct RankedRow {
    pub provider_id: ProviderId,
    pub rank: usize,
    /// Score in percent.
    pub score: f64,
}

/// JSON output of `slabroker select`.
#[derive(Debug, Serialize, Deserialize, JsonSchema)]
pub struct SelectionReport {
    pub weighted_utility: Vec<RankedRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topsis: Option<Vec<RankedRow>>,
    /// Per provider and attribute: whether the normalized offer reaches
    /// the normalized requirement.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub satisfaction: Option<BTreeMap<ProviderId, BTreeMap<String, bool>>>,
}

fn rows(table: &RankingTable<f64>) -> Vec<RankedRow> {
    table
        .entries
        .iter()
        .map(|e| RankedRow { provider_id: e.provider_id.clone(), rank: e.rank, score: e.score * 100.0 })
        .collect()
}

pub fn run(args: SelectArgs) -> Result<()> {
    let offers = inputs::offers(&args.offers)?;
    let mut doc = inputs::request(&args.request)?;
    if let Some(spec) = &args.weights {
        for (name, w) in inputs::named_values(spec)? {
            let Some(entry) = doc.entries.iter_mut().find(|e| e.name == name) else {
                bail!("--weights: request has no attribute `{name}`");
            };
            entry.weight = w;
        }
        doc.validate().context("--weights")?;
    }
    let (requirement, specs) = to_requirement::<f64>(&doc, &DirectionRegistry::default())
        .with_context(|| format!("{}: cannot build requirement", args.request.display()))?;
    let weighted = select_best(&offers, &requirement, &specs).context("weighted-utility ranking failed")?;
    let topsis = if args.topsis { Some(topsis_rank(&offers, &requirement, &specs).context("TOPSIS ranking failed")?) } else { None };
    let satisfaction = if args.report { Some(satisfaction_flags(&normalize(&offers, &requirement, &specs)?)) } else { None };

    let report = SelectionReport { weighted_utility: rows(&weighted), topsis: topsis.as_ref().map(rows), satisfaction };
    let attributes: Vec<String> = specs.iter().map(|s| s.name.clone()).collect();
    let text = match args.output.format {
        Format::Json => output::json(&report)?,
        Format::Csv => {
            let (header, body) = flat(&report, &attributes);
            output::csv(&header, &body)
        }
        Format::Table => render_table(&report, &attributes),
    };
    output::emit(args.output.out.as_deref(), &text)
}

fn flag(report: &SelectionReport, id: &ProviderId, attribute: &str) -> String {
    let met = report.satisfaction.as_ref().and_then(|s| s.get(id)).and_then(|m| m.get(attribute)).copied().unwrap_or(false);
    if met { "yes" } else { "no" }.to_owned()
}

fn flat(report: &SelectionReport, attributes: &[String]) -> (Vec<String>, Vec<Vec<String>>) {
    let mut header: Vec<String> = ["method", "rank", "provider_id", "score_percent"].map(String::from).to_vec();
    if report.satisfaction.is_some() {
        header.extend(attributes.iter().map(|a| format!("meets_{a}")));
    }
    let methods = [("weighted_utility", Some(&report.weighted_utility)), ("topsis", report.topsis.as_ref())];
    let mut body = Vec::new();
    for (method, table) in methods {
        for row in table.into_iter().flatten() {
            let mut cells = vec![method.to_owned(), row.rank.to_string(), row.provider_id.to_string(), format!("{:.2}", row.score)];
            if report.satisfaction.is_some() {
                cells.extend(attributes.iter().map(|a| flag(report, &row.provider_id, a)));
            }
            body.push(cells);
        }
    }
    (header, body)
}

fn render_table(report: &SelectionReport, attributes: &[String]) -> String {
    let section = |title: &str, score: &str, table: &[RankedRow]| {
        let mut header: Vec<String> = vec!["rank".into(), "provider".into(), score.into()];
        if report.satisfaction.is_some() {
            header.extend(attributes.iter().cloned());
        }
        let body: Vec<Vec<String>> = table
            .iter()
            .map(|r| {
                let mut cells = vec![r.rank.to_string(), r.provider_id.to_string(), format!("{:.2}", r.score)];
                if report.satisfaction.is_some() {
                    cells.extend(attributes.iter().map(|a| flag(report, &r.provider_id, a)));
                }
                cells
            })
            .collect();
        format!("{title}\n{}", output::table(&header, &body))
    };
    let mut out = section("Weighted utility", "utility %", &report.weighted_utility);
    if let Some(t) = &report.topsis {
        out.push('\n');
        out.push_str(&section("TOPSIS", "closeness %", t));
    }
    out
}
