use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, ValueEnum};
use halp::basis::{Basis, Marginal, StateRelevanceDensity};
use halp::halp::{build_halp, solve_halp, DeltaProbe, HalpSolution, SolveOptions};
use halp::lp::SearchMode;
use halp::model::HybridModel;
use halp::policy::RolloutOptions;
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::io::{out_path, read_basis, read_json, read_model, solution_file, write_json};
use crate::report::{fmt_num, table};
use crate::Format;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SearchKind {
    Exhaustive,
    Greedy,
}

/// Constraint-search flags shared by `solve` and `scaleup`.
#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    #[arg(long, value_enum, default_value = "exhaustive")]
    pub search: SearchKind,
    /// Random restarts per round of greedy search.
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    /// Confirm greedy convergence with one exhaustive sweep.
    #[arg(long)]
    pub verify: bool,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 20_000)]
    pub max_iterations: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Box on every weight; defaults to max(R_max/(1-γ), 1).
    #[arg(long)]
    pub weight_bound: Option<f64>,
}

impl SearchArgs {
    pub fn mode(&self) -> SearchMode {
        match self.search {
            SearchKind::Exhaustive => SearchMode::Exhaustive,
            SearchKind::Greedy => SearchMode::Greedy {
                restarts: self.restarts,
                verify: self.verify,
            },
        }
    }

    pub fn options(&self) -> SolveOptions {
        SolveOptions {
            search: self.mode(),
            tol: self.tol,
            max_iterations: self.max_iterations,
            seed: self.seed,
            weight_bound: self.weight_bound,
            ..SolveOptions::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub basis: PathBuf,
    /// Grid resolution; repeat for a sweep.
    #[arg(long, required = true)]
    pub eps: Vec<f64>,
    #[command(flatten)]
    pub search: SearchArgs,
    /// JSON map from state variable name to relevance marginal.
    #[arg(long)]
    pub relevance: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    /// Store wall-clock solve times in the JSON outputs.
    #[arg(long)]
    pub record_timings: bool,
}

/// Builds and solves one ε-HALP, returning the solution and its wall time.
pub fn solve_once(
    model: &HybridModel,
    bases: &[Basis],
    psi: &StateRelevanceDensity,
    eps: f64,
    opts: &SolveOptions,
) -> halp::Result<(HalpSolution, f64)> {
    let start = Instant::now();
    let program = build_halp(model, bases, psi, eps)?;
    let mut sol = solve_halp(&program, opts)?;
    let seconds = start.elapsed().as_secs_f64();
    sol.diagnostics.solve_seconds = Some(seconds);
    Ok((sol, seconds))
}

pub fn run(args: &SolveArgs) -> Result<()> {
    let config = ExperimentConfig {
        model: args.model.clone(),
        basis: args.basis.clone(),
        eps: args.eps.clone(),
        search: args.search.mode(),
        tol: args.search.tol,
        max_iterations: args.search.max_iterations,
        rollout: RolloutOptions::default(),
        baselines: vec![],
    };
    config.validate()?;
    let model = read_model(&config.model)?;
    let basis = read_basis(&config.basis, &model)?;
    let psi = match &args.relevance {
        Some(path) => {
            let overrides: BTreeMap<String, Marginal> = read_json(path)?;
            StateRelevanceDensity::with_overrides(&model, &overrides).map_err(|e| CliError::Validation {
                path: path.clone(),
                message: e.to_string(),
            })?
        }
        None => StateRelevanceDensity::uniform(&model),
    };
    let opts = SolveOptions {
        search: config.search,
        tol: config.tol,
        max_iterations: config.max_iterations,
        ..args.search.options()
    };

    let mut solutions = vec![];
    let mut rows = vec![];
    for &eps in &config.eps {
        let (mut sol, seconds) = match solve_once(&model, &basis.bases, &psi, eps, &opts) {
            Ok(r) => r,
            Err(halp::Error::BudgetExceeded {
                iterations,
                max_violation,
                weights,
                objective,
            }) => {
                let partial = json!({
                    "status": "budget_exceeded",
                    "eps": eps,
                    "iterations": iterations,
                    "max_violation": max_violation,
                    "weights": weights,
                    "objective": objective,
                    "basis_ref": basis.fingerprint,
                });
                if let Some(path) = out_path(&args.out_dir, &format!("solution_{eps}.partial.json")) {
                    write_json(&path, &partial)?;
                }
                print_rows(args.format, &rows, &solutions);
                return Err(CliError::Budget(format!(
                    "eps {eps}: iteration budget of {iterations} exhausted (max violation {max_violation:.3e})"
                )));
            }
            Err(e) => return Err(e.into()),
        };
        sol.basis_ref = basis.fingerprint.clone();
        if !args.record_timings {
            sol.diagnostics.solve_seconds = None;
        }
        if let Some(path) = out_path(&args.out_dir, &solution_file(eps)) {
            write_json(&path, &sol)?;
        }
        rows.push(row(&sol, seconds));
        solutions.push(sol);
    }
    print_rows(args.format, &rows, &solutions);
    Ok(())
}

fn row(sol: &HalpSolution, seconds: f64) -> Vec<String> {
    let delta = match sol.diagnostics.delta_probe {
        DeltaProbe::Grid { .. } => fmt_num(sol.measured_delta),
        DeltaProbe::Sample { .. } => format!("~{}", fmt_num(sol.measured_delta)),
    };
    vec![
        format!("{}", sol.eps),
        sol.diagnostics.grid_points_per_axis.to_string(),
        fmt_num(sol.objective),
        sol.diagnostics.constraints_added.to_string(),
        delta,
        format!("{seconds:.3}"),
    ]
}

fn print_rows(format: Format, rows: &[Vec<String>], solutions: &[HalpSolution]) {
    match format {
        Format::Text => print!(
            "{}",
            table(&["eps", "grid", "objective", "constraints", "delta", "time(s)"], rows)
        ),
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&json!({ "solutions": solutions })).expect("json")
        ),
    }
}
