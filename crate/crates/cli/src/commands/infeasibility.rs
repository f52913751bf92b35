use std::path::PathBuf;

use clap::Args;
use halp::halp::{measure_infeasibility, Probe};
use serde_json::json;

use crate::error::{CliError, Result};
use crate::io::{read_basis, read_model, read_solution};
use crate::Format;

#[derive(Debug, Args)]
pub struct InfeasibilityArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub basis: PathBuf,
    #[arg(long)]
    pub solution: PathBuf,
    /// Probe every point of this grid; defaults to half the solution's eps.
    #[arg(long, conflicts_with = "samples")]
    pub probe_eps: Option<f64>,
    /// Probe this many uniform random points instead of a grid.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

pub fn run(args: &InfeasibilityArgs) -> Result<()> {
    let model = read_model(&args.model)?;
    let basis = read_basis(&args.basis, &model)?;
    let sol = read_solution(&args.solution)?;
    if sol.weights.len() != basis.bases.len() {
        return Err(CliError::Misuse(format!(
            "{} has {} weights but {} has {} functions",
            args.solution.display(),
            sol.weights.len(),
            args.basis.display(),
            basis.bases.len()
        )));
    }
    let probe = match args.samples {
        Some(n) => Probe::Sample { n, seed: args.seed },
        None => {
            let eps = args.probe_eps.unwrap_or(sol.eps / 2.0);
            if !(eps > 0.0 && eps <= 1.0) {
                return Err(CliError::Misuse(format!("probe eps must lie in (0, 1], got {eps}")));
            }
            Probe::Grid { eps }
        }
    };
    let delta = measure_infeasibility(&model, &basis.bases, &sol.weights, probe)?;
    let probe_json = match probe {
        Probe::Grid { eps } => json!({ "kind": "grid", "eps": eps }),
        Probe::Sample { n, seed } => json!({ "kind": "sample", "points": n, "seed": seed }),
    };
    match args.format {
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&json!({ "eps": sol.eps, "probe": probe_json, "delta": delta })).expect("json")
        ),
        Format::Text => match probe {
            Probe::Grid { eps } => println!("delta {delta:.6e} on the eps={eps} grid"),
            Probe::Sample { n, .. } => println!("delta ~{delta:.6e} over {n} sampled points (estimate)"),
        },
    }
    Ok(())
}
