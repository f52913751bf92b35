use std::path::PathBuf;

use clap::Args;
use halp::basis::StateRelevanceDensity;
use halp::irrigation::generate;
use halp::model::HybridModel;
use serde::Serialize;

use super::generate::{family_spec, Family};
use super::solve::{solve_once, SearchArgs};
use crate::error::{CliError, Result};
use crate::io::write_json;
use crate::report::{fit_quadratic, fmt_num, table, QuadraticFit};
use crate::Format;

#[derive(Debug, Args)]
pub struct ScaleupArgs {
    #[arg(long, value_enum, default_value = "ring")]
    pub family: Family,
    /// Instance size; repeat for a sweep.
    #[arg(long, required = true)]
    pub n: Vec<usize>,
    #[arg(long, default_values_t = [0.25])]
    pub eps: Vec<f64>,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Solves per instance; the median time is reported.
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    /// Put wall-clock times and the trend fit into the JSON outputs.
    #[arg(long)]
    pub record_timings: bool,
}

#[derive(Debug, Serialize)]
struct Instance {
    n: usize,
    eps: f64,
    state_vars: usize,
    action_vars: usize,
    basis_functions: usize,
    status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    objective: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    constraints_added: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seconds: Option<f64>,
}

#[derive(Debug, Serialize)]
struct Trend {
    eps: f64,
    fit: Option<QuadraticFit>,
    /// `t(n_{k+1}) / t(n_k)` over successive solved instances.
    ratios: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct Scaleup {
    family: String,
    instances: Vec<Instance>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    trends: Vec<Trend>,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

pub fn run(args: &ScaleupArgs) -> Result<()> {
    if args.family == Family::Custom {
        return Err(CliError::Misuse("scaleup needs --family ring or ring-of-rings".into()));
    }
    if args.repeats == 0 {
        return Err(CliError::Misuse("--repeats must be at least 1".into()));
    }
    if let Some(e) = args.eps.iter().find(|&&e| !(e > 0.0 && e <= 1.0)) {
        return Err(CliError::Misuse(format!("eps must lie in (0, 1], got {e}")));
    }
    let opts = args.search.options();
    let mut instances = vec![];
    let mut times = vec![];
    for &eps in &args.eps {
        for &n in &args.n {
            let (doc, basis) = generate(&family_spec(args.family, n))?;
            let model = HybridModel::new(doc.clone())?;
            let bases = basis.compile(&model)?;
            let psi = StateRelevanceDensity::uniform(&model);
            let mut inst = Instance {
                n,
                eps,
                state_vars: doc.state_vars.len(),
                action_vars: doc.action_vars.len(),
                basis_functions: bases.len(),
                status: "ok".into(),
                objective: None,
                constraints_added: None,
                seconds: None,
            };
            let mut walls = vec![];
            for _ in 0..args.repeats {
                match solve_once(&model, &bases, &psi, eps, &opts) {
                    Ok((sol, seconds)) => {
                        inst.objective = Some(sol.objective);
                        inst.constraints_added = Some(sol.diagnostics.constraints_added);
                        walls.push(seconds);
                    }
                    Err(e) => {
                        inst.status = format!("error: {e}");
                        break;
                    }
                }
            }
            let t = (walls.len() == args.repeats).then(|| median(walls));
            times.push(t);
            instances.push(inst);
        }
    }

    let trends: Vec<Trend> = args
        .eps
        .iter()
        .enumerate()
        .map(|(k, &eps)| {
            let pts: Vec<(f64, f64)> = args
                .n
                .iter()
                .zip(&times[k * args.n.len()..(k + 1) * args.n.len()])
                .filter_map(|(&n, t)| t.map(|t| (n as f64, t)))
                .collect();
            let (x, y): (Vec<f64>, Vec<f64>) = pts.iter().copied().unzip();
            Trend {
                eps,
                fit: fit_quadratic(&x, &y),
                ratios: y.windows(2).map(|w| w[1] / w[0]).collect(),
            }
        })
        .collect();

    let mut report = Scaleup {
        family: format!("{:?}", args.family).to_lowercase(),
        instances,
        trends,
    };
    let text_rows: Vec<Vec<String>> = report
        .instances
        .iter()
        .zip(&times)
        .map(|(i, t)| {
            vec![
                i.n.to_string(),
                i.eps.to_string(),
                i.state_vars.to_string(),
                i.action_vars.to_string(),
                i.objective.map_or("-".into(), fmt_num),
                i.constraints_added.map_or("-".into(), |c| c.to_string()),
                t.map_or_else(|| i.status.clone(), |t| format!("{t:.4}")),
            ]
        })
        .collect();
    let text_trends: Vec<String> = report
        .trends
        .iter()
        .map(|t| {
            let ratios: Vec<String> = t.ratios.iter().map(|r| format!("{r:.2}")).collect();
            match &t.fit {
                Some(f) => format!(
                    "eps {}: t(n) = {:.3e} + {:.3e} n + {:.3e} n^2, R^2 = {:.4}, ratios [{}]",
                    t.eps,
                    f.coefficients[0],
                    f.coefficients[1],
                    f.coefficients[2],
                    f.r_squared,
                    ratios.join(", ")
                ),
                None => format!("eps {}: too few solved instances to fit", t.eps),
            }
        })
        .collect();

    if args.record_timings {
        for (i, t) in report.instances.iter_mut().zip(&times) {
            i.seconds = *t;
        }
    } else {
        report.trends.clear();
    }
    if let Some(dir) = &args.out_dir {
        write_json(&dir.join("scaleup.json"), &report)?;
    }
    match args.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&report).expect("json")),
        Format::Text => {
            print!(
                "{}",
                table(&["n", "eps", "states", "actions", "objective", "constraints", "time(s)"], &text_rows)
            );
            for line in text_trends {
                println!("{line}");
            }
        }
    }
    Ok(())
}
