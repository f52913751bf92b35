use rayon::prelude::*;

use crate::model::{HybridModel, Point, Transition};
use crate::special::beta_pdf;
use crate::{Error, Result};

use super::ActionGrid;

const MAX_STATES: usize = 1_000_000;
/// Cap on `states² · actions`, the work of one sweep.
const MAX_SWEEP: f64 = 1e10;

/// A hybrid model restricted to a state grid: continuous next-state
/// densities are evaluated at the grid values and normalized per variable.
pub struct DiscretizedMdp<'m> {
    model: &'m HybridModel,
    axes: Vec<Vec<f64>>,
    actions: ActionGrid,
    n_states: usize,
    n_actions: usize,
    rewards: Vec<f64>,
    /// For each (state, action), one distribution per state variable.
    probs: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueIteration {
    pub values: Vec<f64>,
    /// Flat action-grid index of a greedy action per state.
    pub policy: Vec<usize>,
    /// Sup-norm Bellman residual of `values`.
    pub residual: f64,
    pub iterations: usize,
}

impl<'m> DiscretizedMdp<'m> {
    /// `points` values per continuous state axis (`k/(points−1)`), the
    /// action grid at resolution `action_eps`.
    pub fn new(model: &'m HybridModel, points: usize, action_eps: f64) -> Result<Self> {
        if points < 2 {
            return Err(Error::Misuse("state grid needs at least 2 points per axis".into()));
        }
        let axes: Vec<Vec<f64>> = (0..model.n_state())
            .map(|v| match model.domain_size(v) {
                Some(d) => (0..d).map(|k| k as f64).collect(),
                None => (0..points).map(|k| k as f64 / (points - 1) as f64).collect(),
            })
            .collect();
        let n_states = axes.iter().try_fold(1usize, |acc, a| acc.checked_mul(a.len()).filter(|&n| n <= MAX_STATES));
        let Some(n_states) = n_states else {
            return Err(Error::TooLarge(format!("discretized state space exceeds {MAX_STATES} states")));
        };
        let actions = ActionGrid::new(model, action_eps)?;
        let n_actions = usize::try_from(actions.n_joint()).unwrap_or(usize::MAX);
        if (n_states as f64).powi(2) * n_actions as f64 > MAX_SWEEP {
            return Err(Error::TooLarge(format!(
                "{n_states} states and {n_actions} actions exceed the value-iteration budget"
            )));
        }
        let mut mdp = Self {
            model,
            axes,
            actions,
            n_states,
            n_actions,
            rewards: vec![],
            probs: vec![],
        };
        let pairs: Vec<(f64, Vec<Vec<f64>>)> = (0..n_states * n_actions)
            .into_par_iter()
            .map(|sa| {
                let x = mdp.state(sa / n_actions);
                let a = mdp.actions.decode(sa % n_actions);
                let p = Point::new(&x, &a);
                let dists = (0..model.n_state())
                    .map(|v| match model.transition(v) {
                        Transition::Discrete { .. } => model.discrete_probs(v, &p),
                        Transition::Continuous(_) => {
                            let shapes = model.beta_shapes(v, &p);
                            let dens: Vec<f64> = mdp.axes[v]
                                .iter()
                                .map(|&g| shapes.iter().map(|&(w, a, b)| w * beta_pdf(a, b, g)).sum())
                                .collect();
                            let total: f64 = dens.iter().sum();
                            dens.into_iter().map(|d| d / total).collect()
                        }
                    })
                    .collect();
                (model.reward(&p), dists)
            })
            .collect();
        (mdp.rewards, mdp.probs) = pairs.into_iter().unzip();
        Ok(mdp)
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn actions(&self) -> &ActionGrid {
        &self.actions
    }

    pub fn model(&self) -> &'m HybridModel {
        self.model
    }

    /// State values for flat index `s` (row-major, last variable fastest).
    pub fn state(&self, mut s: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.axes.len()];
        for v in (0..self.axes.len()).rev() {
            let n = self.axes[v].len();
            x[v] = self.axes[v][s % n];
            s /= n;
        }
        x
    }

    /// `Σ_{x'} P(x' | s, a) V(x')`, contracting one variable at a time.
    pub fn expectation(&self, s: usize, a: usize, values: &[f64]) -> f64 {
        let dists = &self.probs[s * self.n_actions + a];
        let mut cur: Vec<f64> = values.to_vec();
        for d in dists.iter().rev() {
            let n = d.len();
            cur = cur.chunks_exact(n).map(|c| c.iter().zip(d).map(|(v, p)| v * p).sum()).collect();
        }
        cur[0]
    }

    fn backup(&self, values: &[f64], s: usize) -> (f64, usize) {
        let gamma = self.model.discount();
        let mut best = (f64::NEG_INFINITY, 0);
        for a in 0..self.n_actions {
            let q = self.rewards[s * self.n_actions + a] + gamma * self.expectation(s, a, values);
            if q > best.0 {
                best = (q, a);
            }
        }
        best
    }

    /// `max_s (T V)(s) − V(s)`: how far `V` is from satisfying every
    /// Bellman inequality `V ≥ T V`.
    pub fn bellman_gap(&self, values: &[f64]) -> f64 {
        (0..self.n_states)
            .into_par_iter()
            .map(|s| self.backup(values, s).0 - values[s])
            .reduce(|| f64::NEG_INFINITY, f64::max)
    }

    /// Iterates the Bellman operator until successive iterates differ by at
    /// most `tol` in sup norm.
    pub fn value_iteration(&self, tol: f64, max_iterations: usize) -> Result<ValueIteration> {
        let mut v = vec![0.0; self.n_states];
        for it in 1..=max_iterations {
            let next: Vec<(f64, usize)> = (0..self.n_states).into_par_iter().map(|s| self.backup(&v, s)).collect();
            let change = next.iter().zip(&v).map(|(n, o)| (n.0 - o).abs()).fold(0.0, f64::max);
            v = next.iter().map(|n| n.0).collect();
            if change <= tol {
                let after: Vec<(f64, usize)> = (0..self.n_states).into_par_iter().map(|s| self.backup(&v, s)).collect();
                let residual = after.iter().zip(&v).map(|(n, o)| (n.0 - o).abs()).fold(0.0, f64::max);
                return Ok(ValueIteration {
                    policy: after.iter().map(|n| n.1).collect(),
                    values: v,
                    residual,
                    iterations: it,
                });
            }
        }
        Err(Error::Numerical(format!("value iteration did not reach {tol:e} in {max_iterations} sweeps")))
    }
}
