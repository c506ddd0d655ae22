use std::path::PathBuf;

use anyhow::{ensure, Context, Result};
use clap::ValueEnum;
use slabroker_core::negotiation::{global_utility, utility_cost, utility_gain, AttributeUtility, UtilityParams};
use slabroker_core::qos::Direction;

use crate::output;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Curve {
    /// F over x for each beta.
    Gain,
    /// G over y for each beta.
    Cost,
    /// U over (x, y) for one gain and one cost attribute.
    Surface,
}

#[derive(clap::Args)]
pub struct CurvesArgs {
    #[arg(value_enum)]
    curve: Curve,
    /// Shape parameter; for `surface`, `gain,cost`.
    #[arg(long, default_value = "0.99")]
    alpha: String,
    /// Sensitivities; for `surface`, `gain,cost`.
    #[arg(long, default_value = "1,2,4")]
    betas: String,
    /// Weights for `surface`, `gain,cost`.
    #[arg(long, default_value = "0.7,0.3")]
    weights: String,
    /// Points per axis, including both ends.
    #[arg(long, default_value_t = 101)]
    grid: usize,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn list(flag: &str, spec: &str) -> Result<Vec<f64>> {
    spec.split(',')
        .map(|s| s.trim().parse::<f64>().with_context(|| format!("--{flag}: `{s}` is not a number")))
        .collect()
}

fn pair(flag: &str, spec: &str) -> Result<(f64, f64)> {
    let v = list(flag, spec)?;
    ensure!(v.len() == 2, "--{flag} needs two values for a surface, got {}", v.len());
    Ok((v[0], v[1]))
}

fn label(v: f64) -> String {
    let s = format!("{v}");
    s.replace('.', "_")
}

pub fn run(args: CurvesArgs) -> Result<()> {
    ensure!(args.grid >= 2, "--grid must be at least 2");
    let axis: Vec<f64> = (0..args.grid).map(|i| i as f64 / (args.grid - 1) as f64).collect();
    let text = match args.curve {
        Curve::Gain | Curve::Cost => {
            let alpha: f64 = args.alpha.trim().parse().with_context(|| format!("--alpha: `{}` is not a number", args.alpha))?;
            let betas = list("betas", &args.betas)?;
            let (var, fname) = if args.curve == Curve::Gain { ("x", "F") } else { ("y", "G") };
            let mut header = vec![var.to_owned()];
            header.extend(betas.iter().map(|b| format!("{fname}_beta_{}", label(*b))));
            let rows = axis
                .iter()
                .map(|&t| {
                    let mut row = vec![format!("{t:.6}")];
                    for &b in &betas {
                        let v = if args.curve == Curve::Gain { utility_gain(t, alpha, b) } else { utility_cost(t, alpha, b) };
                        row.push(format!("{}", v?));
                    }
                    Ok(row)
                })
                .collect::<Result<Vec<_>>>()?;
            output::csv(&header, &rows)
        }
        Curve::Surface => {
            let (ax, ay) = pair("alpha", &args.alpha)?;
            let (bx, by) = pair("betas", &args.betas)?;
            let (wx, wy) = pair("weights", &args.weights)?;
            let params = UtilityParams::new(vec![
                AttributeUtility::new("x", Direction::UtilityDriven, ax, bx, wx),
                AttributeUtility::new("y", Direction::CostDriven, ay, by, wy),
            ])?;
            let header = ["x", "y", "U"].map(String::from).to_vec();
            let mut rows = Vec::with_capacity(axis.len() * axis.len());
            for &x in &axis {
                for &y in &axis {
                    let u = global_utility(&[("x".to_string(), x), ("y".to_string(), y)].into(), &params)?;
                    rows.push(vec![format!("{x:.6}"), format!("{y:.6}"), format!("{u}")]);
                }
            }
            output::csv(&header, &rows)
        }
    };
    output::emit(args.out.as_deref(), &text)
}
