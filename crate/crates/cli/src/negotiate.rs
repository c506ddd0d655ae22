use std::path::PathBuf;

use anyhow::{Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slabroker_core::negotiation::{Concession, NegotiationResult, Outcome};
use slabroker_core::provider::Scenario;

use crate::inputs;
use crate::output::{self, Format};
use crate::OutputArgs;

#[derive(clap::Args)]
pub struct NegotiateArgs {
    /// Scenario file: broker utility parameters, session settings and the
    /// provider agent.
    scenario: PathBuf,
    /// Acceptance threshold in [0,1].
    #[arg(long)]
    threshold: Option<f64>,
    /// Maximum number of rounds.
    #[arg(long)]
    max_rounds: Option<u32>,
    /// Broker concession per round (linear).
    #[arg(long)]
    delta: Option<f64>,
    /// Provider concession per round (linear).
    #[arg(long)]
    gamma: Option<f64>,
    /// Perturb the provider's opening levels uniformly by up to this much.
    #[arg(long, default_value_t = 0.0)]
    jitter: f64,
    /// Seed for --jitter.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    anyhow::ensure!((0.0..=1.0).contains(&v), "--{name} must be in [0,1], got {v}");
    Ok(())
}

pub fn run(args: NegotiateArgs) -> Result<()> {
    let mut scenario: Scenario<f64> = inputs::read_json(&args.scenario)?;
    if let Some(t) = args.threshold {
        check_unit("threshold", t)?;
        scenario.session.threshold = t;
    }
    if let Some(m) = args.max_rounds {
        anyhow::ensure!(m >= 1, "--max-rounds must be at least 1");
        scenario.session.max_rounds = m;
    }
    if let Some(d) = args.delta {
        check_unit("delta", d)?;
        scenario.session.concession = Concession::linear(d);
    }
    if let Some(g) = args.gamma {
        check_unit("gamma", g)?;
        scenario.provider.strategy = Concession::linear(g);
    }
    check_unit("jitter", args.jitter)?;
    if args.jitter > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        for level in scenario.provider.opening_terms.values_mut() {
            *level = (*level + rng.gen_range(-args.jitter..=args.jitter)).clamp(0.0, 1.0);
        }
    }
    let result = scenario.run("cli").with_context(|| format!("{}: negotiation failed", args.scenario.display()))?;
    let text = match args.output.format {
        Format::Json => output::json(&result)?,
        Format::Csv => {
            let (h, b) = transcript_rows(&result);
            output::csv(&h, &b)
        }
        Format::Table => {
            let (h, b) = transcript_rows(&result);
            format!("{}\n{}", output::table(&h, &b), summary(&result))
        }
    };
    output::emit(args.output.out.as_deref(), &text)
}

fn transcript_rows(result: &NegotiationResult<f64>) -> (Vec<String>, Vec<Vec<String>>) {
    let header = ["round", "from", "message", "utility", "terms"].map(String::from).to_vec();
    let body = result
        .transcript
        .iter()
        .map(|e| {
            let m = &e.message;
            let terms = m
                .terms
                .as_ref()
                .map(|t| t.iter().map(|(k, v)| format!("{k}={v:.4}")).collect::<Vec<_>>().join(" "))
                .unwrap_or_default();
            vec![
                m.round.to_string(),
                format!("{:?}", m.from).to_lowercase(),
                format!("{:?}", m.kind),
                e.utility.map(|u| format!("{u:.4}")).unwrap_or_default(),
                terms,
            ]
        })
        .collect();
    (header, body)
}

fn summary(result: &NegotiationResult<f64>) -> String {
    let what = match result.outcome {
        Outcome::Agreement => "agreement",
        Outcome::MaxRoundsExceeded => "maximum rounds exceeded",
        Outcome::Rejected => "rejected by provider",
        Outcome::Withdrawn => "withdrawn",
    };
    format!("outcome: {what} after {} round(s)\n", result.rounds)
}
