//! Factored basis functions `f(x) = f_D(x_D) · f_C(x_C)` and their
//! one-step expectations.

mod backproject;
mod relevance;

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use backproject::{
    backproject_discrete, backproject_monomial, backproject_piecewise_linear, constraint_function, Backprojection,
    ConstraintFunction, ContinuousBackprojection, DiscreteBackprojection,
};
pub use relevance::{relevance_weight, Marginal, StateRelevanceDensity};

use crate::model::{check_knots, HybridModel, PiecewiseLinear, Pwl};
use crate::{Error, Result};

/// Table over a few discrete state variables, row-major like scoped functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteFactor {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub scope: Vec<String>,
    pub table: Vec<f64>,
}

impl Default for DiscreteFactor {
    fn default() -> Self {
        Self {
            scope: vec![],
            table: vec![1.0],
        }
    }
}

impl DiscreteFactor {
    /// `1{var = value}` over a variable with `domain` values.
    pub fn indicator(var: &str, domain: usize, value: usize) -> Self {
        let mut table = vec![0.0; domain];
        table[value] = 1.0;
        Self {
            scope: vec![var.to_string()],
            table,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum ContinuousFactor {
    /// `Π_j x_j^{m_j}`; empty means the constant 1.
    Monomial {
        #[serde(default)]
        degrees: BTreeMap<String, u32>,
    },
    /// Product of 1-D piecewise-linear functions.
    PiecewiseLinear { pieces: Vec<PiecewiseLinear> },
}

impl Default for ContinuousFactor {
    fn default() -> Self {
        Self::Monomial {
            degrees: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BasisFunction {
    #[serde(default)]
    pub discrete_factor: DiscreteFactor,
    #[serde(default)]
    pub continuous_factor: ContinuousFactor,
}

impl BasisFunction {
    pub fn constant() -> Self {
        Self::default()
    }

    pub fn monomial(degrees: &[(&str, u32)]) -> Self {
        Self {
            discrete_factor: DiscreteFactor::default(),
            continuous_factor: ContinuousFactor::Monomial {
                degrees: degrees.iter().map(|(v, d)| (v.to_string(), *d)).collect(),
            },
        }
    }

    pub fn piecewise(var: &str, knots: Vec<f64>, values: Vec<f64>) -> Self {
        Self {
            discrete_factor: DiscreteFactor::default(),
            continuous_factor: ContinuousFactor::PiecewiseLinear {
                pieces: vec![PiecewiseLinear {
                    var: var.to_string(),
                    knots,
                    values,
                }],
            },
        }
    }

    pub fn with_discrete(mut self, factor: DiscreteFactor) -> Self {
        self.discrete_factor = factor;
        self
    }
}

/// A basis file: `{"basis": [...]}`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BasisSet {
    pub basis: Vec<BasisFunction>,
}

impl BasisSet {
    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("basis sets always serialize")
    }

    /// Hex SHA-256 of the compact JSON form; solutions record it so they
    /// can be matched to the basis they were computed for.
    pub fn fingerprint(&self) -> String {
        let text = serde_json::to_string(self).expect("basis sets always serialize");
        Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn compile(&self, model: &HybridModel) -> Result<Vec<Basis>> {
        self.basis
            .iter()
            .enumerate()
            .map(|(i, b)| {
                Basis::new(model, b).map_err(|e| match e {
                    Error::Misuse(m) => Error::Misuse(format!("basis[{i}]: {m}")),
                    other => other,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum CFactor {
    Monomial(Vec<(usize, u32)>),
    Pwl(Vec<(usize, Pwl)>),
}

/// A basis function resolved against a model.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    pub(crate) discrete: Vec<(usize, usize)>,
    pub(crate) table: Vec<f64>,
    pub(crate) continuous: CFactor,
}

pub(crate) fn resolve_discrete(model: &HybridModel, f: &DiscreteFactor) -> Result<(Vec<(usize, usize)>, Vec<f64>)> {
    let mut rows = 1usize;
    let mut vars = Vec::with_capacity(f.scope.len());
    let mut seen = HashSet::new();
    for name in &f.scope {
        let v = state_var(model, name)?;
        if !seen.insert(v) {
            return Err(Error::Misuse(format!("\"{name}\" repeated in discrete factor scope")));
        }
        let d = model
            .domain_size(v)
            .ok_or_else(|| Error::Misuse(format!("discrete factor scope contains continuous variable \"{name}\"")))?;
        rows *= d;
        vars.push((v, d));
    }
    if f.table.len() != rows {
        return Err(Error::Misuse(format!(
            "discrete factor table has {} entries, expected {rows}",
            f.table.len()
        )));
    }
    if f.table.iter().any(|v| !v.is_finite()) {
        return Err(Error::Misuse("discrete factor table must be finite".into()));
    }
    Ok((vars, f.table.clone()))
}

pub(crate) fn resolve_monomial(model: &HybridModel, degrees: &BTreeMap<String, u32>) -> Result<Vec<(usize, u32)>> {
    let mut out = vec![];
    for (name, &m) in degrees {
        let v = state_var(model, name)?;
        if m == 0 {
            continue;
        }
        if !model.is_continuous(v) {
            return Err(Error::Misuse(format!("monomial degree on discrete variable \"{name}\"")));
        }
        out.push((v, m));
    }
    Ok(out)
}

pub(crate) fn resolve_pwl(model: &HybridModel, pieces: &[PiecewiseLinear]) -> Result<Vec<(usize, Pwl)>> {
    let mut out: Vec<(usize, Pwl)> = vec![];
    for p in pieces {
        let v = state_var(model, &p.var)?;
        if !model.is_continuous(v) {
            return Err(Error::Misuse(format!("piecewise-linear factor on discrete variable \"{}\"", p.var)));
        }
        if out.iter().any(|(w, _)| *w == v) {
            return Err(Error::Misuse(format!("\"{}\" has two piecewise-linear factors", p.var)));
        }
        check_knots(&p.knots, &p.values).map_err(|m| Error::Misuse(format!("piece over \"{}\": {m}", p.var)))?;
        out.push((v, Pwl::new(p.knots.clone(), p.values.clone())));
    }
    Ok(out)
}

fn state_var(model: &HybridModel, name: &str) -> Result<usize> {
    match model.var_index(name) {
        Some(v) if model.is_state(v) => Ok(v),
        Some(_) => Err(Error::Misuse(format!("basis functions range over state variables; \"{name}\" is an action"))),
        None => Err(Error::Misuse(format!("unknown variable \"{name}\""))),
    }
}

impl Basis {
    pub fn new(model: &HybridModel, f: &BasisFunction) -> Result<Self> {
        let (discrete, table) = resolve_discrete(model, &f.discrete_factor)?;
        let continuous = match &f.continuous_factor {
            ContinuousFactor::Monomial { degrees } => CFactor::Monomial(resolve_monomial(model, degrees)?),
            ContinuousFactor::PiecewiseLinear { pieces } => CFactor::Pwl(resolve_pwl(model, pieces)?),
        };
        Ok(Self {
            discrete,
            table,
            continuous,
        })
    }

    pub fn discrete_value(&self, x: &[f64]) -> f64 {
        let row = self.discrete.iter().fold(0, |acc, &(v, d)| acc * d + x[v] as usize);
        self.table[row]
    }

    pub fn continuous_value(&self, x: &[f64]) -> f64 {
        match &self.continuous {
            CFactor::Monomial(ds) => ds.iter().map(|&(v, m)| x[v].powi(m as i32)).product(),
            CFactor::Pwl(ps) => ps.iter().map(|(v, f)| f.eval(x[*v])).product(),
        }
    }

    /// `f(x) = f_D(x_D) · f_C(x_C)`.
    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.discrete_value(x) * self.continuous_value(x)
    }

    /// State variables the basis function depends on, sorted.
    pub fn scope(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.discrete.iter().map(|(v, _)| *v).collect();
        match &self.continuous {
            CFactor::Monomial(ds) => s.extend(ds.iter().map(|(v, _)| *v)),
            CFactor::Pwl(ps) => s.extend(ps.iter().map(|(v, _)| *v)),
        }
        s.sort_unstable();
        s.dedup();
        s
    }

    pub(crate) fn discrete_max_abs(&self) -> f64 {
        self.table.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Per continuous variable: `(var, sup |factor|, sup |factor'|)`.
    pub(crate) fn continuous_bounds(&self) -> Vec<(usize, f64, f64)> {
        match &self.continuous {
            CFactor::Monomial(ds) => ds.iter().map(|&(v, m)| (v, 1.0, f64::from(m))).collect(),
            CFactor::Pwl(ps) => ps.iter().map(|(v, f)| (*v, f.max_abs(), f.max_abs_slope())).collect(),
        }
    }
}
