use std::path::PathBuf;

use clap::Args;
use halp::halp::HalpSolution;
use halp::policy::{
    initial_states, rollout, ActionSearch, Controller, GreedyPolicy, HeuristicController, HeuristicKind,
    RolloutOptions, RolloutReport,
};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::io::{read_basis, read_model, read_solution, write_json};
use crate::report::{fmt_num, table};
use crate::Format;

fn parse_baseline(s: &str) -> Result<HeuristicKind, String> {
    s.parse().map_err(|e: halp::Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub basis: PathBuf,
    /// Solution file to turn into a greedy policy; repeatable.
    #[arg(long)]
    pub solution: Vec<PathBuf>,
    /// Comma-separated baselines: random, local, global:<trials>.
    #[arg(long, value_delimiter = ',', value_parser = parse_baseline)]
    pub baselines: Vec<HeuristicKind>,
    #[arg(long, default_value_t = 100)]
    pub trajectories: usize,
    #[arg(long, default_value_t = 100)]
    pub horizon: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Action grid resolution; defaults to each solution's eps.
    #[arg(long)]
    pub action_eps: Option<f64>,
    /// Pick policy actions by coordinate ascent with this many restarts
    /// instead of enumerating the action grid.
    #[arg(long)]
    pub coordinate_ascent: Option<usize>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Debug, Serialize)]
struct Row {
    method: String,
    mean: f64,
    std_dev: f64,
    standard_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    solve_seconds: Option<f64>,
    report: RolloutReport,
}

#[derive(Debug, Serialize)]
struct Evaluation {
    trajectories: usize,
    horizon: usize,
    seed: u64,
    rows: Vec<Row>,
}

pub fn run(args: &EvaluateArgs) -> Result<()> {
    let rollout_opts = RolloutOptions {
        trajectories: args.trajectories,
        horizon: args.horizon,
        seed: args.seed,
    };
    let solutions: Vec<(PathBuf, HalpSolution)> = args
        .solution
        .iter()
        .map(|p| Ok((p.clone(), read_solution(p)?)))
        .collect::<Result<_>>()?;
    let config = ExperimentConfig {
        model: args.model.clone(),
        basis: args.basis.clone(),
        eps: solutions.iter().map(|(_, s)| s.eps).chain(args.action_eps).collect(),
        search: halp::lp::SearchMode::Exhaustive,
        tol: 0.0,
        max_iterations: 0,
        rollout: rollout_opts,
        baselines: args.baselines.clone(),
    };
    config.validate()?;
    if solutions.is_empty() && config.baselines.is_empty() {
        return Err(CliError::Misuse("nothing to evaluate: pass --solution or --baselines".into()));
    }
    let model = read_model(&config.model)?;
    let basis = read_basis(&config.basis, &model)?;
    for (path, sol) in &solutions {
        if sol.basis_ref != basis.fingerprint || sol.weights.len() != basis.bases.len() {
            return Err(CliError::Misuse(format!(
                "{} was not solved with basis {}",
                path.display(),
                config.basis.display()
            )));
        }
    }
    let search = match args.coordinate_ascent {
        Some(restarts) => ActionSearch::CoordinateAscent { restarts },
        None => ActionSearch::Exhaustive,
    };

    let initial = initial_states(&model, rollout_opts.trajectories, rollout_opts.seed);
    let mut rows = vec![];
    let mut push = |controller: &dyn Controller, solve_seconds: Option<f64>| -> Result<()> {
        let report = rollout(&model, controller, &rollout_opts, &initial)?;
        rows.push(Row {
            method: report.controller.clone(),
            mean: report.mean,
            std_dev: report.std_dev,
            standard_error: report.standard_error(),
            solve_seconds,
            report,
        });
        Ok(())
    };
    for (_, sol) in &solutions {
        let eps = args.action_eps.unwrap_or(sol.eps);
        let policy = GreedyPolicy::new(&model, &basis.bases, &sol.weights, eps, search)?
            .with_label(format!("halp eps={}", sol.eps));
        push(&policy, sol.diagnostics.solve_seconds)?;
    }
    let baseline_eps = args
        .action_eps
        .or_else(|| solutions.iter().map(|(_, s)| s.eps).reduce(f64::min))
        .unwrap_or(0.25);
    for &kind in &config.baselines {
        let controller = HeuristicController::new(&model, kind, baseline_eps)?;
        push(&controller, None)?;
    }

    let evaluation = Evaluation {
        trajectories: rollout_opts.trajectories,
        horizon: rollout_opts.horizon,
        seed: rollout_opts.seed,
        rows,
    };
    if let Some(dir) = &args.out_dir {
        write_json(&dir.join("evaluation.json"), &evaluation)?;
    }
    match args.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&evaluation).expect("json")),
        Format::Text => {
            let rows: Vec<Vec<String>> = evaluation
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.method.clone(),
                        fmt_num(r.mean),
                        fmt_num(r.std_dev),
                        fmt_num(r.standard_error),
                        r.solve_seconds.map_or("-".into(), |s| format!("{s:.3}")),
                    ]
                })
                .collect();
            print!("{}", table(&["method", "mu", "sigma", "se", "time(s)"], &rows));
        }
    }
    Ok(())
}
