//! Policies: greedy lookahead on an approximate value function, heuristic
//! baselines, Monte Carlo evaluation, and exact value iteration on small
//! discretized models.

mod heuristics;
mod rollout;
mod vi;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use heuristics::{expected_next_reward, one_step_score, HeuristicController, HeuristicKind};
pub use rollout::{initial_states, rollout, RolloutOptions, RolloutReport};
pub use vi::{DiscretizedMdp, ValueIteration};

use crate::basis::{Backprojection, Basis};
use crate::halp::{grid_count, GridField, ScopeTable};
use crate::lp::{exhaustive_search, greedy_search, unflatten, SlackField};
use crate::model::{HybridModel, Point};
use crate::{Error, Result};

/// Anything that picks an action for a state. Randomized controllers draw
/// from the supplied stream only.
pub trait Controller: Sync {
    fn name(&self) -> String;
    fn act(&self, x: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64>;
}

/// Candidate values of every action variable: the full domain of discrete
/// ones, an ε-grid for continuous ones.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionGrid {
    values: Vec<Vec<f64>>,
}

impl ActionGrid {
    pub fn new(model: &HybridModel, eps: f64) -> Result<Self> {
        let count = grid_count(eps)?;
        let values = (model.n_state()..model.n_vars())
            .map(|v| match model.domain_size(v) {
                Some(d) => (0..d).map(|k| k as f64).collect(),
                None => (0..count).map(|k| k as f64 / (count - 1) as f64).collect(),
            })
            .collect();
        Ok(Self { values })
    }

    pub fn shape(&self) -> Vec<usize> {
        self.values.iter().map(Vec::len).collect()
    }

    pub fn values(&self, k: usize) -> &[f64] {
        &self.values[k]
    }

    pub fn n_joint(&self) -> u128 {
        self.values.iter().map(|v| v.len() as u128).product()
    }

    pub fn action(&self, z: &[usize]) -> Vec<f64> {
        z.iter().enumerate().map(|(k, &i)| self.values[k][i]).collect()
    }

    pub fn decode(&self, flat: usize) -> Vec<f64> {
        let shape = self.shape();
        let mut z = vec![0; shape.len()];
        unflatten(&shape, flat, &mut z);
        self.action(&z)
    }
}

/// `R(x, a) + γ Σ_i w_i g_i(x, a)`.
pub fn q_value(model: &HybridModel, bases: &[Basis], w: &[f64], x: &[f64], a: &[f64]) -> Result<f64> {
    if w.len() != bases.len() {
        return Err(Error::Misuse(format!("{} weights for {} basis functions", w.len(), bases.len())));
    }
    model.check_state(x)?;
    model.check_action(a)?;
    let p = Point::new(x, a);
    let future: f64 = bases.iter().zip(w).map(|(b, wi)| wi * Backprojection::new(model, b).eval(&p)).sum();
    Ok(model.reward(&p) + model.discount() * future)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionSearch {
    Exhaustive,
    /// One-axis-at-a-time ascent from random starts.
    CoordinateAscent { restarts: usize },
}

/// Acts greedily with respect to `Hw` under one-step lookahead.
pub struct GreedyPolicy<'m> {
    model: &'m HybridModel,
    projections: Vec<Backprojection<'m>>,
    w: Vec<f64>,
    grid: ActionGrid,
    search: ActionSearch,
    basis_scopes: Vec<Vec<usize>>,
    reward_scopes: Vec<Vec<usize>>,
    label: String,
}

fn action_scope(model: &HybridModel, scope: impl IntoIterator<Item = usize>) -> Vec<usize> {
    let mut s: Vec<usize> = scope.into_iter().filter(|&v| v >= model.n_state()).map(|v| v - model.n_state()).collect();
    s.sort_unstable();
    s.dedup();
    s
}

impl<'m> GreedyPolicy<'m> {
    pub fn new(model: &'m HybridModel, bases: &[Basis], w: &[f64], eps: f64, search: ActionSearch) -> Result<Self> {
        if w.len() != bases.len() {
            return Err(Error::Misuse(format!("{} weights for {} basis functions", w.len(), bases.len())));
        }
        let projections: Vec<Backprojection> = bases.iter().map(|b| Backprojection::new(model, b)).collect();
        let basis_scopes = projections.iter().map(|g| action_scope(model, g.scope().iter().copied())).collect();
        let reward_scopes = model.rewards().iter().map(|r| action_scope(model, r.scope())).collect();
        Ok(Self {
            model,
            projections,
            w: w.to_vec(),
            grid: ActionGrid::new(model, eps)?,
            search,
            basis_scopes,
            reward_scopes,
            label: "greedy".into(),
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn action_grid(&self) -> &ActionGrid {
        &self.grid
    }

    pub fn q_value(&self, x: &[f64], a: &[f64]) -> f64 {
        let p = Point::new(x, a);
        let future: f64 = self.projections.iter().zip(&self.w).map(|(g, wi)| wi * g.eval(&p)).sum();
        self.model.reward(&p) + self.model.discount() * future
    }

    /// `−q(x, ·)` over the action grid as a sum of small tables.
    fn field(&self, x: &[f64]) -> GridField {
        let shape = self.grid.shape();
        let gamma = self.model.discount();
        let mut a = self.grid.action(&vec![0; shape.len()]);
        let mut tables = vec![];
        let mut fill = |vars: &[usize], f: &dyn Fn(&Point) -> f64| {
            ScopeTable::build(vars, &shape, |z| {
                for &v in vars {
                    a[v] = self.grid.values[v][z[v]];
                }
                f(&Point::new(x, &a))
            })
            .expect("action scopes are small")
        };
        for ((g, &wi), vars) in self.projections.iter().zip(&self.w).zip(&self.basis_scopes) {
            if wi != 0.0 {
                tables.push(fill(vars, &|p| gamma * wi * g.eval(p)));
            }
        }
        for (r, vars) in self.model.rewards().iter().zip(&self.reward_scopes) {
            tables.push(fill(vars, &|p| r.eval(p)));
        }
        GridField::new(&[], &tables, &[], &shape)
            .expect("action scopes are small")
            .lexicographic()
    }

    /// Best grid action; ties go to the first in lexicographic grid order.
    pub fn greedy_action(&self, x: &[f64]) -> Vec<f64> {
        let shape = self.grid.shape();
        let field = self.field(x);
        let flat = match self.search {
            ActionSearch::Exhaustive => exhaustive_search(&field, &shape).expect("action grid is non-empty").0,
            ActionSearch::CoordinateAscent { restarts } => {
                let mut rng = ChaCha8Rng::seed_from_u64(state_hash(x));
                greedy_search(&field as &dyn SlackField, &shape, restarts, &mut rng).0
            }
        };
        self.grid.decode(flat)
    }
}

fn state_hash(x: &[f64]) -> u64 {
    x.iter().fold(0xcbf2_9ce4_8422_2325, |h, v| (h ^ v.to_bits()).wrapping_mul(0x0100_0000_01b3))
}

impl Controller for GreedyPolicy<'_> {
    fn name(&self) -> String {
        self.label.clone()
    }

    fn act(&self, x: &[f64], _rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.greedy_action(x)
    }
}
