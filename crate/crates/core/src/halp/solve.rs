use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{constraint_function, Basis, ConstraintFunction};
use crate::lp::{exhaustive_search, solve_with_generation, ConstraintOracle, GenerationOptions, SearchMode, SlackField};
use crate::model::{HybridModel, Point};
use crate::{Error, Result};

use super::program::{default_weight_bound, grid_tables, GridField, HalpProgram};
use super::EpsGrid;

/// How the reported `measured_delta` was obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DeltaProbe {
    /// Every point of the solve grid; exact for that grid.
    Grid { points: u64 },
    /// Uniformly drawn grid points; a lower estimate.
    Sample { points: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub search: String,
    pub constraints_added: usize,
    pub iterations: usize,
    pub lp_pivots: usize,
    pub grid_points_per_axis: usize,
    pub delta_probe: DeltaProbe,
    /// Wall time of the solve; left out of files unless asked for, since it
    /// differs from run to run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve_seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalpSolution {
    pub weights: Vec<f64>,
    pub objective: f64,
    pub eps: f64,
    pub measured_delta: f64,
    /// Fingerprint of the basis set the weights belong to.
    pub basis_ref: String,
    pub diagnostics: Diagnostics,
}

impl HalpSolution {
    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solutions always serialize")
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub search: SearchMode,
    pub tol: f64,
    pub max_iterations: usize,
    pub seed: u64,
    /// Weight box half-width; defaults to `max(R_max/(1−γ), 1)`.
    pub weight_bound: Option<f64>,
    /// Grid points drawn to estimate δ when the search is not exhaustive.
    pub delta_samples: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            search: SearchMode::Exhaustive,
            tol: 1e-6,
            max_iterations: 20_000,
            seed: 0,
            weight_bound: None,
            delta_samples: 100_000,
        }
    }
}

pub fn solve_halp(program: &HalpProgram, opts: &SolveOptions) -> Result<HalpSolution> {
    let start = Instant::now();
    let n = program.dim();
    let bound = opts.weight_bound.unwrap_or_else(|| program.weight_bound());
    let mut gen_opts = GenerationOptions::new(opts.search, bound, n);
    gen_opts.tol = opts.tol;
    gen_opts.max_iterations = opts.max_iterations;
    gen_opts.seed = opts.seed;
    let result = solve_with_generation(program.alphas(), program, &gen_opts)?;

    let (measured_delta, delta_probe) = if result.certified {
        let points = program.grid().n_points().min(u64::MAX as u128) as u64;
        (result.max_violation, DeltaProbe::Grid { points })
    } else {
        let field = program.field(&result.weights)?;
        let shape = program.grid().shape();
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5eed_de17a);
        let mut z = vec![0; shape.len()];
        let mut worst = f64::INFINITY;
        for _ in 0..opts.delta_samples {
            for (zk, &s) in z.iter_mut().zip(shape) {
                *zk = rng.random_range(0..s);
            }
            worst = worst.min(field.slack(&z));
        }
        (
            (-worst).max(0.0),
            DeltaProbe::Sample {
                points: opts.delta_samples as u64,
                seed: opts.seed,
            },
        )
    };
    let objective = result.weights.iter().zip(program.alphas()).map(|(w, a)| w * a).sum();
    Ok(HalpSolution {
        weights: result.weights,
        objective,
        eps: program.grid().eps,
        measured_delta,
        basis_ref: String::new(),
        diagnostics: Diagnostics {
            search: match opts.search {
                SearchMode::Exhaustive => "exhaustive".into(),
                SearchMode::Greedy { .. } => "greedy".into(),
            },
            constraints_added: result.added_constraints,
            iterations: result.iterations,
            lp_pivots: result.pivots,
            grid_points_per_axis: program.grid().count,
            delta_probe,
            solve_seconds: Some(start.elapsed().as_secs_f64()),
        },
    })
}

/// Where to look for constraint violations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Probe {
    /// Every point of the ε-grid.
    Grid { eps: f64 },
    /// `n` points drawn uniformly from the continuous domain.
    Sample { n: usize, seed: u64 },
}

/// `max(0, max_z R(z) − Σ_i w_i F_i(z))` over the probe points.
pub fn measure_infeasibility(model: &HybridModel, bases: &[Basis], w: &[f64], probe: Probe) -> Result<f64> {
    if w.len() != bases.len() {
        return Err(Error::Misuse(format!("{} weights for {} basis functions", w.len(), bases.len())));
    }
    let functions: Vec<ConstraintFunction> = bases.iter().map(|b| constraint_function(model, b)).collect();
    match probe {
        Probe::Grid { eps } => {
            let grid = EpsGrid::new(model, eps)?;
            let (f, r) = grid_tables(model, &functions, &grid)?;
            let field = GridField::new(&f, &r, w, grid.shape())?;
            let (_, slack) = exhaustive_search(&field, grid.shape())?;
            Ok((-slack).max(0.0))
        }
        Probe::Sample { n, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let nv = model.n_vars();
            let points: Vec<Vec<f64>> = (0..n)
                .map(|_| {
                    (0..nv)
                        .map(|v| match model.domain_size(v) {
                            Some(d) => rng.random_range(0..d) as f64,
                            None => rng.random::<f64>(),
                        })
                        .collect()
                })
                .collect();
            let worst = points
                .par_iter()
                .map(|vals| {
                    let (x, a) = vals.split_at(model.n_state());
                    let p = Point::new(x, a);
                    let lhs: f64 = functions.iter().zip(w).map(|(f, wi)| wi * f.eval(&p)).sum();
                    model.reward(&p) - lhs
                })
                .reduce(|| f64::NEG_INFINITY, f64::max);
            Ok(worst.max(0.0))
        }
    }
}

/// Grid resolution guaranteeing δ-infeasibility over the continuum:
/// `ε = δ / (M·K_max)` capped at 1, with `M` the number of `F_i` and `R_j`
/// terms and `K_max` the largest Lipschitz bound among them (`F_i` bounds
/// scaled by the weight bound). Bounds are sums of per-axis derivative
/// bounds, which is the right constant for max-norm distance.
pub fn resolution_for_delta(model: &HybridModel, bases: &[Basis], w_bound: Option<f64>, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::Misuse(format!("delta must be positive, got {delta}")));
    }
    let w_bound = w_bound.unwrap_or_else(|| default_weight_bound(model));
    let mut k_max: f64 = 0.0;
    for r in model.rewards() {
        let k: f64 = r.continuous_scope().iter().map(|&v| r.derivative_bound(v)).sum();
        k_max = k_max.max(k);
    }
    for b in bases {
        let f = constraint_function(model, b);
        let k: f64 = f
            .scope()
            .iter()
            .filter(|&&v| model.is_continuous(v))
            .map(|&v| f.derivative_bound(v))
            .sum();
        k_max = k_max.max(w_bound * k);
    }
    if !k_max.is_finite() {
        return Err(Error::Misuse("no finite Lipschitz bound for some term".into()));
    }
    let m = (bases.len() + model.rewards().len()) as f64;
    if k_max == 0.0 {
        return Ok(1.0);
    }
    Ok((delta / (m * k_max)).min(1.0))
}
