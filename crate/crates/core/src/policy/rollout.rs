use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::HybridModel;
use crate::{Error, Result};

use super::Controller;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RolloutOptions {
    pub trajectories: usize,
    pub horizon: usize,
    pub seed: u64,
}

impl Default for RolloutOptions {
    fn default() -> Self {
        Self {
            trajectories: 100,
            horizon: 100,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RolloutReport {
    pub controller: String,
    /// Mean over trajectories of the per-step average reward.
    pub mean: f64,
    /// Sample standard deviation of the per-step averages.
    pub std_dev: f64,
    pub trajectories: usize,
    pub horizon: usize,
    pub seed: u64,
    pub undiscounted: Vec<f64>,
    pub discounted: Vec<f64>,
}

impl RolloutReport {
    pub fn standard_error(&self) -> f64 {
        self.std_dev / (self.trajectories as f64).sqrt()
    }
}

/// `n` states drawn uniformly (continuous on `[0,1]`, discrete over the
/// domain); shared by every controller compared under the same seed.
pub fn initial_states(model: &HybridModel, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    (0..n)
        .map(|_| {
            (0..model.n_state())
                .map(|v| match model.domain_size(v) {
                    Some(d) => rng.random_range(0..d) as f64,
                    None => rng.random::<f64>(),
                })
                .collect()
        })
        .collect()
}

/// Simulates `controller` from each initial state. Trajectory `t` draws its
/// dynamics from stream `2t` and hands stream `2t+1` to the controller, so
/// different controllers see the same noise wherever their actions agree.
pub fn rollout(
    model: &HybridModel,
    controller: &dyn Controller,
    opts: &RolloutOptions,
    initial: &[Vec<f64>],
) -> Result<RolloutReport> {
    if opts.horizon == 0 || opts.trajectories == 0 {
        return Err(Error::Misuse("rollouts need at least one trajectory and one step".into()));
    }
    if initial.len() < opts.trajectories {
        return Err(Error::Misuse(format!(
            "{} initial states for {} trajectories",
            initial.len(),
            opts.trajectories
        )));
    }
    for x in initial {
        model.check_state(x)?;
    }
    let gamma = model.discount();
    let sums: Vec<(f64, f64)> = (0..opts.trajectories)
        .into_par_iter()
        .map(|t| {
            let mut dynamics = ChaCha8Rng::seed_from_u64(opts.seed);
            dynamics.set_stream(2 * t as u64);
            let mut choice = ChaCha8Rng::seed_from_u64(opts.seed);
            choice.set_stream(2 * t as u64 + 1);
            let mut x = initial[t].clone();
            let (mut total, mut disc, mut g) = (0.0, 0.0, 1.0);
            for _ in 0..opts.horizon {
                let a = controller.act(&x, &mut choice);
                let r = model.eval_reward(&x, &a).expect("controllers return in-domain actions");
                total += r;
                disc += g * r;
                g *= gamma;
                x = model.sample_transition(&x, &a, &mut dynamics);
            }
            (total, disc)
        })
        .collect();
    let h = opts.horizon as f64;
    let averages: Vec<f64> = sums.iter().map(|s| s.0 / h).collect();
    let n = averages.len() as f64;
    let mean = averages.iter().sum::<f64>() / n;
    let std_dev = if averages.len() > 1 {
        (averages.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(RolloutReport {
        controller: controller.name(),
        mean,
        std_dev,
        trajectories: opts.trajectories,
        horizon: opts.horizon,
        seed: opts.seed,
        undiscounted: sums.iter().map(|s| s.0).collect(),
        discounted: sums.iter().map(|s| s.1).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BetaCpf, ContinuousExpr, Cpf, ModelDoc, ScopedFunction, VariableSpec, DEFAULT_FLOOR};
    use crate::policy::{HeuristicController, HeuristicKind};

    fn model(reward: Option<f64>) -> HybridModel {
        HybridModel::new(ModelDoc {
            state_vars: vec![VariableSpec::continuous("x")],
            action_vars: vec![VariableSpec::discrete("a", 2)],
            cpfs: vec![Cpf::Beta(BetaCpf {
                child: "x".into(),
                h1: ScopedFunction::tabular(
                    &["a"],
                    &["x"],
                    vec![ContinuousExpr::linear("x", 1.0, 2.0), ContinuousExpr::constant(3.0)],
                ),
                h2: ScopedFunction::constant(2.0),
                floor: DEFAULT_FLOOR,
            })],
            rewards: reward.map(|c| vec![ScopedFunction::constant(c)]).unwrap_or_default(),
            discount: 0.9,
        })
        .unwrap()
    }

    #[test]
    fn degenerate_rewards() {
        let opts = RolloutOptions {
            trajectories: 10,
            horizon: 5,
            seed: 3,
        };
        for (r, want) in [(None, 0.0), (Some(2.5), 2.5)] {
            let m = model(r);
            let c = HeuristicController::new(&m, HeuristicKind::Random, 0.5).unwrap();
            let init = initial_states(&m, 10, 3);
            let rep = rollout(&m, &c, &opts, &init).unwrap();
            assert!((rep.mean - want).abs() < 1e-12);
            assert!(rep.std_dev < 1e-12);
        }
    }

    #[test]
    fn fixed_seed_is_bit_identical() {
        let m = model(Some(1.0));
        let mut doc = m.doc().clone();
        doc.rewards = vec![ScopedFunction::continuous(&["x"], ContinuousExpr::power("x", 1.0, 1))];
        let m = HybridModel::new(doc).unwrap();
        let c = HeuristicController::new(&m, HeuristicKind::Random, 0.5).unwrap();
        let opts = RolloutOptions {
            trajectories: 8,
            horizon: 20,
            seed: 9,
        };
        let init = initial_states(&m, 8, 9);
        let a = rollout(&m, &c, &opts, &init).unwrap();
        let b = rollout(&m, &c, &opts, &init).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert!(a.std_dev > 0.0);
    }
}
