use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use anyhow::{Context, Result};
use chrono::DateTime;
use slabroker_core::monitoring::{evaluate_compliance, ingest, map_metrics, MetricMapping, SloStatus, TimeWindow, DEFAULT_BUCKET_MS};
use slabroker_core::sla::Sla;

use crate::inputs;
use crate::output::{self, Format};
use crate::OutputArgs;

#[derive(clap::Args)]
pub struct MonitorArgs {
    /// Agreement as JSON.
    #[arg(long)]
    sla: PathBuf,
    /// Metric samples, one JSON object per line.
    #[arg(long)]
    feed: PathBuf,
    /// Window start: epoch milliseconds or RFC 3339.
    #[arg(long)]
    start: String,
    /// Window end (exclusive): epoch milliseconds or RFC 3339.
    #[arg(long)]
    end: String,
    /// Metric-to-indicator rules as JSON; identity by indicator name when absent.
    #[arg(long)]
    mapping: Option<PathBuf>,
    /// Bucket length for heartbeat-derived availability.
    #[arg(long, default_value_t = DEFAULT_BUCKET_MS)]
    bucket_ms: i64,
    #[command(flatten)]
    output: OutputArgs,
}

fn instant(flag: &str, s: &str) -> Result<i64> {
    if let Ok(ms) = s.trim().parse::<i64>() {
        return Ok(ms);
    }
    DateTime::parse_from_rfc3339(s.trim())
        .map(|t| t.timestamp_millis())
        .with_context(|| format!("--{flag}: `{s}` is neither epoch milliseconds nor RFC 3339"))
}

pub fn run(args: MonitorArgs) -> Result<()> {
    let sla: Sla = inputs::read_json(&args.sla)?;
    sla.validate().with_context(|| format!("{}: invalid agreement", args.sla.display()))?;
    let mapping = match &args.mapping {
        Some(path) => inputs::read_json::<MetricMapping>(path)?,
        None => MetricMapping::identity_for(&sla),
    };
    let window = TimeWindow::new(instant("start", &args.start)?, instant("end", &args.end)?)?;
    anyhow::ensure!(args.bucket_ms > 0, "--bucket-ms must be positive");
    let file = File::open(&args.feed).with_context(|| format!("cannot open {}", args.feed.display()))?;
    let (store, ingest_report) = ingest(BufReader::new(file));
    for bad in &ingest_report.malformed {
        eprintln!("warning: {}:{}: skipped: {}", args.feed.display(), bad.line, bad.reason);
    }
    let series = map_metrics(&mapping, &store, args.bucket_ms);
    let report = evaluate_compliance(&sla, &series, window)?;

    let text = match args.output.format {
        Format::Json => output::json(&report)?,
        Format::Csv | Format::Table => {
            let header = ["indicator", "comparator", "target", "percentile", "samples", "achieved %", "status", "shortfall"]
                .map(String::from)
                .to_vec();
            let rows: Vec<Vec<String>> = report
                .slos
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    let shortfall = report.violations.iter().find(|v| v.slo_index == i).map(|v| format!("{:.4}", v.shortfall));
                    vec![
                        r.slo.indicator.clone(),
                        r.slo.comparator.symbol().to_owned(),
                        r.slo.target.to_string(),
                        r.slo.percentile.to_string(),
                        r.sample_count.to_string(),
                        r.achieved_fraction.map(output::percent).unwrap_or_default(),
                        match r.status {
                            SloStatus::Compliant => "compliant",
                            SloStatus::Violated => "violated",
                            SloStatus::Indeterminate => "indeterminate",
                        }
                        .to_owned(),
                        shortfall.unwrap_or_default(),
                    ]
                })
                .collect();
            if args.output.format == Format::Csv {
                output::csv(&header, &rows)
            } else {
                output::table(&header, &rows)
            }
        }
    };
    output::emit(args.output.out.as_deref(), &text)
}
