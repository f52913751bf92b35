use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::model::{HybridModel, Point, PosDist};
use crate::{Error, Result};

use super::{ActionGrid, Controller};

/// `E[R_j(x', a) | x, a]`. Closed form when the reward's expressions have
/// one under the beta next-state marginals; a single draw of the reward's
/// continuous next-state variables otherwise.
pub fn expected_next_reward(model: &HybridModel, j: usize, x: &[f64], a: &[f64], rng: &mut ChaCha8Rng) -> f64 {
    let r = &model.rewards()[j];
    let p = Point::new(x, a);
    let n_state = model.n_state();
    let states: Vec<(usize, Vec<f64>)> = r
        .discrete_scope()
        .iter()
        .filter(|(v, _)| *v < n_state)
        .map(|&(v, _)| (v, model.discrete_probs(v, &p)))
        .collect();
    let dists: Vec<PosDist> = r
        .continuous_scope()
        .iter()
        .map(|&v| {
            if v < n_state {
                PosDist::Beta(model.beta_shapes(v, &p))
            } else {
                PosDist::Point(a[v - n_state])
            }
        })
        .collect();
    let mut next = x.to_vec();
    let mut sampled = false;
    let rows: usize = states.iter().map(|(_, q)| q.len()).product();
    let mut total = 0.0;
    for row in 0..rows {
        let mut rest = row;
        let mut weight = 1.0;
        for (v, q) in states.iter().rev() {
            let k = rest % q.len();
            rest /= q.len();
            next[*v] = k as f64;
            weight *= q[k];
        }
        if weight == 0.0 {
            continue;
        }
        let pn = Point::new(&next, a);
        let value = match r.expectation(&pn, &dists) {
            Some(v) => v,
            None => {
                if !sampled {
                    for &v in r.continuous_scope().iter().filter(|&&v| v < n_state) {
                        next[v] = model.sample_variable(v, &p, rng);
                    }
                    sampled = true;
                }
                r.eval(&Point::new(&next, a))
            }
        };
        total += weight * value;
    }
    total
}

/// `Σ_j R_j(x, a) + E[R_j(x', a) | x, a]`.
pub fn one_step_score(model: &HybridModel, x: &[f64], a: &[f64], rng: &mut ChaCha8Rng) -> f64 {
    let p = Point::new(x, a);
    (0..model.rewards().len())
        .map(|j| model.rewards()[j].eval(&p) + expected_next_reward(model, j, x, a, rng))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeuristicKind {
    /// Uniform over the action grid.
    Random,
    /// Each action variable maximizes the one-step score of the reward
    /// factors it can influence, the others held at their first value.
    Local,
    /// Best of `trials` uniformly drawn joint actions (all of them when
    /// `trials` covers the grid).
    Global { trials: usize },
}

impl fmt::Display for HeuristicKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HeuristicKind::Random => write!(f, "random"),
            HeuristicKind::Local => write!(f, "local"),
            HeuristicKind::Global { trials } => write!(f, "global:{trials}"),
        }
    }
}

impl FromStr for HeuristicKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Self::Random),
            "local" => Ok(Self::Local),
            _ => match s.strip_prefix("global:").map(str::parse::<usize>) {
                Some(Ok(trials)) if trials > 0 => Ok(Self::Global { trials }),
                _ => Err(Error::Misuse(format!(
                    "unknown baseline \"{s}\" (expected random, local or global:<trials>)"
                ))),
            },
        }
    }
}

pub struct HeuristicController<'m> {
    model: &'m HybridModel,
    kind: HeuristicKind,
    grid: ActionGrid,
    /// Per action variable, the reward factors it can influence.
    relevant: Vec<Vec<usize>>,
}

impl<'m> HeuristicController<'m> {
    pub fn new(model: &'m HybridModel, kind: HeuristicKind, eps: f64) -> Result<Self> {
        let n_state = model.n_state();
        let relevant = (0..model.n_action())
            .map(|k| {
                let av = n_state + k;
                model
                    .rewards()
                    .iter()
                    .enumerate()
                    .filter(|(_, r)| r.scope().any(|v| v == av || (v < n_state && model.parents(v).contains(&av))))
                    .map(|(j, _)| j)
                    .collect()
            })
            .collect();
        Ok(Self {
            model,
            kind,
            grid: ActionGrid::new(model, eps)?,
            relevant,
        })
    }

    fn local(&self, x: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
        let shape = self.grid.shape();
        let defaults = self.grid.action(&vec![0; shape.len()]);
        let mut out = defaults.clone();
        for (k, rel) in self.relevant.iter().enumerate() {
            let mut a = defaults.clone();
            let mut best = (f64::NEG_INFINITY, defaults[k]);
            for &v in self.grid.values(k) {
                a[k] = v;
                let p = Point::new(x, &a);
                let s: f64 = rel
                    .iter()
                    .map(|&j| self.model.rewards()[j].eval(&p) + expected_next_reward(self.model, j, x, &a, rng))
                    .sum();
                if s > best.0 {
                    best = (s, v);
                }
            }
            out[k] = best.1;
        }
        out
    }
}

impl Controller for HeuristicController<'_> {
    fn name(&self) -> String {
        self.kind.to_string()
    }

    fn act(&self, x: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
        match self.kind {
            HeuristicKind::Random => (0..self.model.n_action())
                .map(|k| {
                    let vals = self.grid.values(k);
                    vals[rng.random_range(0..vals.len())]
                })
                .collect(),
            HeuristicKind::Local => self.local(x, rng),
            HeuristicKind::Global { trials } => {
                let n = self.grid.n_joint();
                let candidates: Vec<usize> = if trials as u128 >= n {
                    (0..n as usize).collect()
                } else {
                    let shape = self.grid.shape();
                    (0..trials)
                        .map(|_| shape.iter().fold(0usize, |acc, &s| acc * s + rng.random_range(0..s)))
                        .collect()
                };
                let mut best = (f64::NEG_INFINITY, 0usize);
                for flat in candidates {
                    let a = self.grid.decode(flat);
                    let s = one_step_score(self.model, x, &a, rng);
                    if s > best.0 {
                        best = (s, flat);
                    }
                }
                self.grid.decode(best.1)
            }
        }
    }
}
