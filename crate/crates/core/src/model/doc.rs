//! Serializable model documents. These mirror the JSON model format field for
//! field and may describe invalid models; see [`validate_model`](super::validate_model).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub const DEFAULT_FLOOR: f64 = 1e-3;

fn default_floor() -> f64 {
    DEFAULT_FLOOR
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariableKind {
    Continuous,
    Discrete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableSpec {
    pub name: String,
    pub kind: VariableKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_size: Option<usize>,
}

impl VariableSpec {
    pub fn continuous(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: VariableKind::Continuous,
            domain_size: None,
        }
    }

    pub fn discrete(name: impl Into<String>, domain_size: usize) -> Self {
        Self {
            name: name.into(),
            kind: VariableKind::Discrete,
            domain_size: Some(domain_size),
        }
    }

    pub fn is_continuous(&self) -> bool {
        self.kind == VariableKind::Continuous
    }
}

/// One product term `coef · Π x^degree` of a polynomial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coef: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub degrees: BTreeMap<String, u32>,
}

/// A 1-D piecewise-linear function of `var` through `(knots[k], values[k])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinear {
    pub var: String,
    pub knots: Vec<f64>,
    pub values: Vec<f64>,
}

/// `weight · N(var; mean, variance)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    pub var: String,
    pub weight: f64,
    pub mean: f64,
    pub variance: f64,
}

/// Expression in the continuous variables of a scoped function.
/// Piecewise-linear pieces and Gaussian components are summed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum ContinuousExpr {
    Constant { value: f64 },
    Polynomial { terms: Vec<Monomial> },
    PiecewiseLinear { pieces: Vec<PiecewiseLinear> },
    GaussianMixture { components: Vec<GaussianComponent> },
}

impl ContinuousExpr {
    pub fn constant(value: f64) -> Self {
        Self::Constant { value }
    }

    /// `coef · var^degree`.
    pub fn power(var: &str, coef: f64, degree: u32) -> Self {
        Self::Polynomial {
            terms: vec![Monomial {
                coef,
                degrees: BTreeMap::from([(var.to_string(), degree)]),
            }],
        }
    }

    /// `offset + slope · var`.
    pub fn linear(var: &str, offset: f64, slope: f64) -> Self {
        let mut terms = vec![Monomial {
            coef: slope,
            degrees: BTreeMap::from([(var.to_string(), 1)]),
        }];
        if offset != 0.0 {
            terms.insert(
                0,
                Monomial {
                    coef: offset,
                    degrees: BTreeMap::new(),
                },
            );
        }
        Self::Polynomial { terms }
    }

    pub fn piecewise(var: &str, knots: Vec<f64>, values: Vec<f64>) -> Self {
        Self::PiecewiseLinear {
            pieces: vec![PiecewiseLinear {
                var: var.to_string(),
                knots,
                values,
            }],
        }
    }

    pub fn gaussian(var: &str, weight: f64, mean: f64, variance: f64) -> Self {
        Self::GaussianMixture {
            components: vec![GaussianComponent {
                var: var.to_string(),
                weight,
                mean,
                variance,
            }],
        }
    }

    /// Every variable name the expression mentions.
    pub fn variables(&self) -> Vec<&str> {
        match self {
            Self::Constant { .. } => vec![],
            Self::Polynomial { terms } => terms
                .iter()
                .flat_map(|t| t.degrees.keys().map(String::as_str))
                .collect(),
            Self::PiecewiseLinear { pieces } => pieces.iter().map(|p| p.var.as_str()).collect(),
            Self::GaussianMixture { components } => {
                components.iter().map(|c| c.var.as_str()).collect()
            }
        }
    }
}

/// A function of a few variables: one continuous expression per joint
/// assignment of `discrete_scope`, enumerated in row-major order (the last
/// discrete variable varies fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScopedFunction {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub discrete_scope: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub continuous_scope: Vec<String>,
    pub table: Vec<ContinuousExpr>,
}

impl ScopedFunction {
    pub fn constant(value: f64) -> Self {
        Self {
            discrete_scope: vec![],
            continuous_scope: vec![],
            table: vec![ContinuousExpr::constant(value)],
        }
    }

    pub fn continuous(scope: &[&str], expr: ContinuousExpr) -> Self {
        Self {
            discrete_scope: vec![],
            continuous_scope: scope.iter().map(|s| s.to_string()).collect(),
            table: vec![expr],
        }
    }

    pub fn tabular(discrete_scope: &[&str], continuous_scope: &[&str], table: Vec<ContinuousExpr>) -> Self {
        Self {
            discrete_scope: discrete_scope.iter().map(|s| s.to_string()).collect(),
            continuous_scope: continuous_scope.iter().map(|s| s.to_string()).collect(),
            table,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaCpf {
    pub child: String,
    pub h1: ScopedFunction,
    pub h2: ScopedFunction,
    #[serde(default = "default_floor")]
    pub floor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub h1: ScopedFunction,
    pub h2: ScopedFunction,
    #[serde(default = "default_floor")]
    pub floor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureBetaCpf {
    pub child: String,
    pub components: Vec<MixtureComponent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscriminantCpf {
    pub child: String,
    pub discriminants: Vec<ScopedFunction>,
    #[serde(default = "default_floor")]
    pub floor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Cpf {
    Beta(BetaCpf),
    MixtureBeta(MixtureBetaCpf),
    Discriminant(DiscriminantCpf),
}

impl Cpf {
    pub fn child(&self) -> &str {
        match self {
            Cpf::Beta(c) => &c.child,
            Cpf::MixtureBeta(c) => &c.child,
            Cpf::Discriminant(c) => &c.child,
        }
    }

    /// Every scoped function the CPF is built from.
    pub fn functions(&self) -> Vec<&ScopedFunction> {
        match self {
            Cpf::Beta(c) => vec![&c.h1, &c.h2],
            Cpf::MixtureBeta(c) => c.components.iter().flat_map(|k| [&k.h1, &k.h2]).collect(),
            Cpf::Discriminant(c) => c.discriminants.iter().collect(),
        }
    }
}

/// The JSON model document: `state_vars`, `action_vars`, `cpfs`, `rewards`, `discount`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDoc {
    pub state_vars: Vec<VariableSpec>,
    #[serde(default)]
    pub action_vars: Vec<VariableSpec>,
    pub cpfs: Vec<Cpf>,
    #[serde(default)]
    pub rewards: Vec<ScopedFunction>,
    pub discount: f64,
}

impl ModelDoc {
    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model documents always serialize")
    }
}
