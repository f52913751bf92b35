//! State relevance densities and the objective weights `α_i = E_ψ[f_i]`.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::model::HybridModel;
use crate::special::{beta_moment, uniform_moment};
use crate::{Error, Result};

use super::{Basis, CFactor};

/// Marginal of ψ over one state variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Marginal {
    Uniform,
    Beta { a: f64, b: f64 },
    Categorical { probs: Vec<f64> },
}

impl Marginal {
    fn beta_shape(&self) -> Option<(f64, f64)> {
        match self {
            Marginal::Uniform => Some((1.0, 1.0)),
            Marginal::Beta { a, b } => Some((*a, *b)),
            Marginal::Categorical { .. } => None,
        }
    }
}

/// Product density `ψ(x) = Π_k ψ_k(x_k)`, one marginal per state variable
/// in model order. `None` entries are allowed but any basis function that
/// touches them cannot be weighted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateRelevanceDensity {
    pub marginals: Vec<Option<Marginal>>,
}

impl StateRelevanceDensity {
    /// Uniform over `[0,1]` for continuous variables and over the domain for
    /// discrete ones.
    pub fn uniform(model: &HybridModel) -> Self {
        let marginals = (0..model.n_state())
            .map(|v| {
                Some(match model.domain_size(v) {
                    Some(d) => Marginal::Categorical {
                        probs: vec![1.0 / d as f64; d],
                    },
                    None => Marginal::Uniform,
                })
            })
            .collect();
        Self { marginals }
    }

    /// Uniform defaults overridden by named marginals. Each override must
    /// match the variable's kind and be normalized.
    pub fn with_overrides(model: &HybridModel, overrides: &BTreeMap<String, Marginal>) -> Result<Self> {
        let mut psi = Self::uniform(model);
        for (name, m) in overrides {
            let v = model
                .var_index(name)
                .filter(|&v| model.is_state(v))
                .ok_or_else(|| Error::Misuse(format!("relevance marginal for unknown state variable \"{name}\"")))?;
            check_marginal(model, v, m)?;
            psi.marginals[v] = Some(m.clone());
        }
        Ok(psi)
    }

    fn marginal(&self, model_var: usize) -> Result<&Marginal> {
        self.marginals
            .get(model_var)
            .and_then(Option::as_ref)
            .ok_or_else(|| Error::Misuse(format!("relevance density has no marginal for variable {model_var}")))
    }

    /// One draw of a full state from ψ; every marginal must be present.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>> {
        self.marginals
            .iter()
            .enumerate()
            .map(|(v, m)| match m {
                None => Err(Error::Misuse(format!("relevance density has no marginal for variable {v}"))),
                Some(Marginal::Uniform) => Ok(rng.random::<f64>()),
                Some(Marginal::Beta { a, b }) => Beta::new(*a, *b)
                    .map(|d| d.sample(rng))
                    .map_err(|e| Error::Misuse(format!("bad Beta marginal: {e}"))),
                Some(Marginal::Categorical { probs }) => {
                    let u: f64 = rng.random();
                    let mut acc = 0.0;
                    for (k, p) in probs.iter().enumerate() {
                        acc += p;
                        if u < acc {
                            return Ok(k as f64);
                        }
                    }
                    Ok((probs.len() - 1) as f64)
                }
            })
            .collect()
    }
}

fn check_marginal(model: &HybridModel, v: usize, m: &Marginal) -> Result<()> {
    let name = &model.var(v).name;
    match (model.domain_size(v), m) {
        (None, Marginal::Uniform) => Ok(()),
        (None, Marginal::Beta { a, b }) if *a > 0.0 && *b > 0.0 && a.is_finite() && b.is_finite() => Ok(()),
        (None, Marginal::Beta { .. }) => Err(Error::Misuse(format!("Beta marginal for \"{name}\" needs positive shapes"))),
        (Some(d), Marginal::Categorical { probs }) => {
            let sum: f64 = probs.iter().sum();
            if probs.len() != d || probs.iter().any(|p| !(*p >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
                Err(Error::Misuse(format!("categorical marginal for \"{name}\" must be {d} probabilities summing to 1")))
            } else {
                Ok(())
            }
        }
        _ => Err(Error::Misuse(format!("marginal kind does not match variable \"{name}\""))),
    }
}

/// `α = α_D · α_C`: the discrete factor enumerated against the categorical
/// marginals, times a product of 1-D expectations of the continuous factor.
pub fn relevance_weight(psi: &StateRelevanceDensity, basis: &Basis) -> Result<f64> {
    let mut alpha_d = 0.0;
    let probs: Vec<&[f64]> = basis
        .discrete
        .iter()
        .map(|&(v, d)| match psi.marginal(v)? {
            Marginal::Categorical { probs } if probs.len() == d => Ok(probs.as_slice()),
            _ => Err(Error::Misuse(format!("variable {v} needs a categorical marginal with {d} entries"))),
        })
        .collect::<Result<_>>()?;
    for (row, f) in basis.table.iter().enumerate() {
        let mut rest = row;
        let mut q = 1.0;
        for (k, &(_, d)) in basis.discrete.iter().enumerate().rev() {
            q *= probs[k][rest % d];
            rest /= d;
        }
        alpha_d += q * f;
    }
    let shape = |v: usize| -> Result<(f64, f64)> {
        psi.marginal(v)?
            .beta_shape()
            .ok_or_else(|| Error::Misuse(format!("variable {v} needs a continuous marginal")))
    };
    let mut alpha_c = 1.0;
    match &basis.continuous {
        CFactor::Monomial(ds) => {
            for &(v, m) in ds {
                alpha_c *= match psi.marginal(v)? {
                    Marginal::Uniform => uniform_moment(m),
                    _ => {
                        let (a, b) = shape(v)?;
                        beta_moment(a, b, m)
                    }
                };
            }
        }
        CFactor::Pwl(ps) => {
            for (v, f) in ps {
                let (a, b) = shape(*v)?;
                alpha_c *= f.beta_expectation(a, b);
            }
        }
    }
    Ok(alpha_d * alpha_c)
}
