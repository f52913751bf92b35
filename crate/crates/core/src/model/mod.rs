//! Hybrid factored MDP models.
//!
//! [`ModelDoc`] is the serializable document; [`HybridModel`] is the
//! validated, name-resolved form every other module works with. Variables are
//! addressed by a joint index: state variables first, then action variables.

mod doc;
mod expr;
mod validate;

use std::collections::{BTreeSet, HashMap};

use rand::Rng;
use rand_distr::{Beta, Distribution};

pub use doc::*;
pub(crate) use expr::{Expr, PosDist};
pub use expr::Pwl;
pub(crate) use validate::check_knots;
pub use validate::{validate_model, Violation};

use crate::special::beta_pdf;
use crate::{Error, Result};

/// Values of all state (`x`) and action (`a`) variables. Discrete values are
/// stored as exact small integers.
#[derive(Debug, Clone, Copy)]
pub struct Point<'a> {
    pub x: &'a [f64],
    pub a: &'a [f64],
}

impl<'a> Point<'a> {
    pub fn new(x: &'a [f64], a: &'a [f64]) -> Self {
        Self { x, a }
    }

    #[inline]
    pub fn get(&self, var: usize) -> f64 {
        if var < self.x.len() {
            self.x[var]
        } else {
            self.a[var - self.x.len()]
        }
    }
}

/// A compiled [`ScopedFunction`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScopedFn {
    discrete: Vec<(usize, usize)>,
    continuous: Vec<usize>,
    table: Vec<Expr>,
}

impl ScopedFn {
    fn compile(f: &ScopedFunction, index: &HashMap<&str, usize>, sizes: &[Option<usize>]) -> Self {
        let discrete = f
            .discrete_scope
            .iter()
            .map(|n| {
                let v = index[n.as_str()];
                (v, sizes[v].expect("discrete"))
            })
            .collect();
        let continuous = f.continuous_scope.iter().map(|n| index[n.as_str()]).collect();
        let table = f.table.iter().map(|e| Expr::compile(e, &f.continuous_scope)).collect();
        Self {
            discrete,
            continuous,
            table,
        }
    }

    #[inline]
    fn row(&self, p: &Point) -> usize {
        self.discrete
            .iter()
            .fold(0, |acc, &(v, d)| acc * d + p.get(v) as usize)
    }

    #[inline]
    pub fn eval(&self, p: &Point) -> f64 {
        let e = &self.table[self.row(p)];
        e.eval(|pos| p.get(self.continuous[pos]))
    }

    /// Joint indices of every variable in scope.
    pub fn scope(&self) -> impl Iterator<Item = usize> + '_ {
        self.discrete.iter().map(|(v, _)| *v).chain(self.continuous.iter().copied())
    }

    pub fn continuous_scope(&self) -> &[usize] {
        &self.continuous
    }

    /// Upper bound on `sup |∂f/∂var|` over every table row.
    pub fn derivative_bound(&self, var: usize) -> f64 {
        match self.continuous.iter().position(|&v| v == var) {
            None => 0.0,
            Some(pos) => self.table.iter().map(|e| e.derivative_bound(pos)).fold(0.0, f64::max),
        }
    }

    /// Conservative enclosure of the function's values.
    pub fn range(&self) -> (f64, f64) {
        self.table
            .iter()
            .map(Expr::range)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (l, h)| (lo.min(l), hi.max(h)))
    }

    /// Expectation when each continuous-scope variable is drawn from `dist`
    /// (indexed by scope position) and discrete-scope variables are fixed by `p`.
    pub(crate) fn expectation(&self, p: &Point, dist: &[PosDist]) -> Option<f64> {
        self.table[self.row(p)].expectation(dist)
    }

    pub(crate) fn discrete_scope(&self) -> &[(usize, usize)] {
        &self.discrete
    }
}

/// One beta component of a continuous CPF: `weight · Beta(h1 ∨ floor, h2 ∨ floor)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaComponent {
    pub weight: f64,
    h1: ScopedFn,
    h2: ScopedFn,
    floor: f64,
}

impl BetaComponent {
    #[inline]
    pub fn shape(&self, p: &Point) -> (f64, f64) {
        (self.h1.eval(p).max(self.floor), self.h2.eval(p).max(self.floor))
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn h1(&self) -> &ScopedFn {
        &self.h1
    }

    pub fn h2(&self) -> &ScopedFn {
        &self.h2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Transition {
    Continuous(Vec<BetaComponent>),
    Discrete { discriminants: Vec<ScopedFn>, floor: f64 },
}

/// A validated hybrid factored MDP.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridModel {
    doc: ModelDoc,
    vars: Vec<VariableSpec>,
    n_state: usize,
    transitions: Vec<Transition>,
    parents: Vec<Vec<usize>>,
    rewards: Vec<ScopedFn>,
}

impl HybridModel {
    pub fn new(doc: ModelDoc) -> Result<Self> {
        let violations = validate_model(&doc);
        if !violations.is_empty() {
            return Err(Error::InvalidModel(violations));
        }
        let vars: Vec<VariableSpec> = doc.state_vars.iter().chain(&doc.action_vars).cloned().collect();
        let index: HashMap<&str, usize> = vars.iter().enumerate().map(|(i, v)| (v.name.as_str(), i)).collect();
        let sizes: Vec<Option<usize>> = vars.iter().map(|v| v.domain_size).collect();
        let n_state = doc.state_vars.len();

        let mut transitions = vec![None; n_state];
        for cpf in &doc.cpfs {
            let child = index[cpf.child()];
            let sf = |f: &ScopedFunction| ScopedFn::compile(f, &index, &sizes);
            let t = match cpf {
                Cpf::Beta(c) => Transition::Continuous(vec![BetaComponent {
                    weight: 1.0,
                    h1: sf(&c.h1),
                    h2: sf(&c.h2),
                    floor: c.floor,
                }]),
                Cpf::MixtureBeta(c) => Transition::Continuous(
                    c.components
                        .iter()
                        .map(|k| BetaComponent {
                            weight: k.weight,
                            h1: sf(&k.h1),
                            h2: sf(&k.h2),
                            floor: k.floor,
                        })
                        .collect(),
                ),
                Cpf::Discriminant(c) => Transition::Discrete {
                    discriminants: c.discriminants.iter().map(sf).collect(),
                    floor: c.floor,
                },
            };
            transitions[child] = Some(t);
        }
        let transitions: Vec<Transition> = transitions.into_iter().map(|t| t.expect("validated")).collect();
        let parents = transitions
            .iter()
            .map(|t| {
                let fns: Vec<&ScopedFn> = match t {
                    Transition::Continuous(cs) => cs.iter().flat_map(|c| [&c.h1, &c.h2]).collect(),
                    Transition::Discrete { discriminants, .. } => discriminants.iter().collect(),
                };
                fns.iter()
                    .flat_map(|f| f.scope())
                    .collect::<BTreeSet<_>>()
                    .into_iter()
                    .collect()
            })
            .collect();
        let rewards = doc
            .rewards
            .iter()
            .map(|f| ScopedFn::compile(f, &index, &sizes))
            .collect();
        Ok(Self {
            doc,
            vars,
            n_state,
            transitions,
            parents,
            rewards,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::new(ModelDoc::from_json(text)?)
    }

    pub fn doc(&self) -> &ModelDoc {
        &self.doc
    }

    pub fn discount(&self) -> f64 {
        self.doc.discount
    }

    pub fn n_state(&self) -> usize {
        self.n_state
    }

    pub fn n_action(&self) -> usize {
        self.vars.len() - self.n_state
    }

    pub fn n_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn var(&self, var: usize) -> &VariableSpec {
        &self.vars[var]
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn is_continuous(&self, var: usize) -> bool {
        self.vars[var].is_continuous()
    }

    pub fn is_state(&self, var: usize) -> bool {
        var < self.n_state
    }

    pub fn domain_size(&self, var: usize) -> Option<usize> {
        self.vars[var].domain_size
    }

    pub fn transition(&self, child: usize) -> &Transition {
        &self.transitions[child]
    }

    /// Parents of next-state variable `child` as sorted joint indices.
    pub fn parents(&self, child: usize) -> &[usize] {
        &self.parents[child]
    }

    pub fn rewards(&self) -> &[ScopedFn] {
        &self.rewards
    }

    /// Upper bound on any single-step total reward, `Σ_j max R_j`.
    pub fn reward_bound(&self) -> f64 {
        self.rewards
            .iter()
            .map(|r| {
                let (lo, hi) = r.range();
                lo.abs().max(hi.abs())
            })
            .sum()
    }

    pub fn check_state(&self, x: &[f64]) -> Result<()> {
        self.check_values(x, 0, self.n_state, "state")
    }

    pub fn check_action(&self, a: &[f64]) -> Result<()> {
        self.check_values(a, self.n_state, self.n_action(), "action")
    }

    fn check_values(&self, vals: &[f64], offset: usize, n: usize, what: &str) -> Result<()> {
        if vals.len() != n {
            return Err(Error::Domain(format!("{what} assignment has {} values, expected {n}", vals.len())));
        }
        for (i, &v) in vals.iter().enumerate() {
            let spec = &self.vars[offset + i];
            let ok = match spec.domain_size {
                None => (0.0..=1.0).contains(&v),
                Some(d) => v >= 0.0 && v < d as f64 && v.fract() == 0.0,
            };
            if !ok {
                return Err(Error::Domain(format!("value {v} out of range for \"{}\"", spec.name)));
            }
        }
        Ok(())
    }

    /// `Σ_j R_j(x_j, a_j)`.
    pub fn eval_reward(&self, x: &[f64], a: &[f64]) -> Result<f64> {
        self.check_state(x)?;
        self.check_action(a)?;
        Ok(self.reward(&Point::new(x, a)))
    }

    #[inline]
    pub fn reward(&self, p: &Point) -> f64 {
        self.rewards.iter().map(|r| r.eval(p)).sum()
    }

    /// `P(X'_child = j | parents)` for every `j` (Eq. 1 ratios of clamped discriminants).
    pub fn discrete_probs(&self, child: usize, p: &Point) -> Vec<f64> {
        match &self.transitions[child] {
            Transition::Discrete { discriminants, floor } => {
                let d: Vec<f64> = discriminants.iter().map(|f| f.eval(p).max(*floor)).collect();
                let total: f64 = d.iter().sum();
                d.into_iter().map(|v| v / total).collect()
            }
            Transition::Continuous(_) => panic!("discrete_probs on continuous variable {child}"),
        }
    }

    /// Weighted beta shapes `(weight, a, b)` of a continuous child.
    pub fn beta_shapes(&self, child: usize, p: &Point) -> Vec<(f64, f64, f64)> {
        match &self.transitions[child] {
            Transition::Continuous(cs) => cs
                .iter()
                .map(|c| {
                    let (a, b) = c.shape(p);
                    (c.weight, a, b)
                })
                .collect(),
            Transition::Discrete { .. } => panic!("beta_shapes on discrete variable {child}"),
        }
    }

    /// Density (continuous child) or probability (discrete child) of
    /// `X'_child = value` given the current point.
    pub fn variable_density(&self, child: usize, value: f64, p: &Point) -> f64 {
        match &self.transitions[child] {
            Transition::Continuous(cs) => cs
                .iter()
                .map(|c| {
                    let (a, b) = c.shape(p);
                    c.weight * beta_pdf(a, b, value)
                })
                .sum(),
            Transition::Discrete { .. } => self.discrete_probs(child, p)[value as usize],
        }
    }

    /// `p(x' | x, a) = Π_i p(x'_i | u_i)`.
    pub fn transition_density(&self, x_next: &[f64], x: &[f64], a: &[f64]) -> Result<f64> {
        self.check_state(x_next)?;
        self.check_state(x)?;
        self.check_action(a)?;
        let p = Point::new(x, a);
        Ok((0..self.n_state)
            .map(|i| self.variable_density(i, x_next[i], &p))
            .product())
    }

    /// Draws `x' ~ p(· | x, a)`, one variable at a time.
    pub fn sample_transition<R: Rng + ?Sized>(&self, x: &[f64], a: &[f64], rng: &mut R) -> Vec<f64> {
        let p = Point::new(x, a);
        (0..self.n_state).map(|i| self.sample_variable(i, &p, rng)).collect()
    }

    /// Draws `X'_child` given the current point.
    pub fn sample_variable<R: Rng + ?Sized>(&self, child: usize, p: &Point, rng: &mut R) -> f64 {
        match &self.transitions[child] {
            Transition::Continuous(cs) => {
                let comp = if cs.len() == 1 {
                    &cs[0]
                } else {
                    let u: f64 = rng.random();
                    let mut acc = 0.0;
                    cs.iter()
                        .find(|c| {
                            acc += c.weight;
                            u < acc
                        })
                        .unwrap_or(&cs[cs.len() - 1])
                };
                let (a, b) = comp.shape(p);
                Beta::new(a, b).expect("positive shapes").sample(rng)
            }
            Transition::Discrete { .. } => {
                let probs = self.discrete_probs(child, p);
                let u: f64 = rng.random();
                let mut acc = 0.0;
                probs
                    .iter()
                    .position(|q| {
                        acc += q;
                        u < acc
                    })
                    .unwrap_or(probs.len() - 1) as f64
            }
        }
    }
}
