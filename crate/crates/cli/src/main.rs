//! `slabroker`: selection, negotiation, utility curves, compliance checks
//! and the broker service from the command line.

mod curves;
mod inputs;
mod monitor;
mod negotiate;
mod output;
mod schema;
mod select;
mod serve;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::output::Format;

#[derive(Parser)]
#[command(name = "slabroker", version, about = "SLA-aware SaaS provider selection, negotiation and monitoring")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rank provider offers against a quality-requirement document.
    Select(select::SelectArgs),
    /// Run a broker/provider negotiation scenario and print the transcript.
    Negotiate(negotiate::NegotiateArgs),
    /// Tabulate utility functions as CSV.
    Curves(curves::CurvesArgs),
    /// Evaluate an SLA against a metric feed.
    Monitor(monitor::MonitorArgs),
    /// Run the broker HTTP service.
    Serve(serve::ServeArgs),
    /// Print or write the JSON schemas of the document formats.
    Schema(schema::SchemaArgs),
}

/// Output options shared by the reporting subcommands.
#[derive(clap::Args, Clone)]
pub struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Select(args) => select::run(args),
        Command::Negotiate(args) => negotiate::run(args),
        Command::Curves(args) => curves::run(args),
        Command::Monitor(args) => monitor::run(args),
        Command::Serve(args) => serve::run(args),
        Command::Schema(args) => schema::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
