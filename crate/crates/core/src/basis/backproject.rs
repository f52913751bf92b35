//! Backprojections `g(x, a) = E[f(x') | x, a]` and constraint functions
//! `F(x, a) = f(x) − γ·g(x, a)`.
//!
//! Given the parents, next-state variables are independent, so the
//! expectation of `f_D · Π_j c_j(x'_j)` splits into a discrete sum over the
//! children of `f_D` and one 1-D expectation per continuous child.

use std::collections::{BTreeMap, BTreeSet};

use crate::model::{HybridModel, PiecewiseLinear, Point, Pwl, Transition};
use crate::special::beta_moment;
use crate::Result;

use super::{resolve_discrete, resolve_monomial, resolve_pwl, Basis, CFactor, DiscreteFactor};

fn parents_of(model: &HybridModel, children: impl Iterator<Item = usize>) -> Vec<usize> {
    children
        .flat_map(|c| model.parents(c).iter().copied())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// `Σ_{x'_D} P(x'_D | x, a) f_D(x'_D)` with `P` a product of discriminant ratios.
#[derive(Debug, Clone)]
pub struct DiscreteBackprojection<'m> {
    model: &'m HybridModel,
    children: Vec<(usize, usize)>,
    table: Vec<f64>,
    scope: Vec<usize>,
}

impl<'m> DiscreteBackprojection<'m> {
    fn from_parts(model: &'m HybridModel, children: Vec<(usize, usize)>, table: Vec<f64>) -> Self {
        let scope = parents_of(model, children.iter().map(|(v, _)| *v));
        Self {
            model,
            children,
            table,
            scope,
        }
    }

    /// Joint indices of `Par(X'_D)`.
    pub fn scope(&self) -> &[usize] {
        &self.scope
    }

    pub fn eval(&self, p: &Point) -> f64 {
        match self.children.len() {
            0 => self.table[0],
            1 => {
                let probs = self.model.discrete_probs(self.children[0].0, p);
                probs.iter().zip(&self.table).map(|(q, f)| q * f).sum()
            }
            _ => {
                let probs: Vec<Vec<f64>> = self
                    .children
                    .iter()
                    .map(|&(v, _)| self.model.discrete_probs(v, p))
                    .collect();
                let mut total = 0.0;
                for (row, f) in self.table.iter().enumerate() {
                    if *f == 0.0 {
                        continue;
                    }
                    let mut rest = row;
                    let mut q = 1.0;
                    for (k, &(_, d)) in self.children.iter().enumerate().rev() {
                        q *= probs[k][rest % d];
                        rest /= d;
                    }
                    total += q * f;
                }
                total
            }
        }
    }

    /// Upper bound on `sup |∂g_D/∂u|` for a continuous parent `u`: each
    /// ratio `d_j / Σ d` moves by at most `2 Σ_k |∂d_k| / Σ d_min`.
    pub(crate) fn derivative_bound(&self, var: usize) -> f64 {
        let fmax = self.table.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let mut total = 0.0;
        for &(child, _) in &self.children {
            if let Transition::Discrete { discriminants, floor } = self.model.transition(child) {
                let slope: f64 = discriminants.iter().map(|d| d.derivative_bound(var)).sum();
                if slope == 0.0 {
                    continue;
                }
                let dmin: f64 = discriminants.iter().map(|d| d.range().0.max(*floor)).sum();
                total += 2.0 * slope / dmin;
            }
        }
        fmax * total
    }
}

/// Backprojection of the continuous factor.
#[derive(Debug, Clone)]
pub struct ContinuousBackprojection<'m> {
    model: &'m HybridModel,
    factor: CFactor,
    scope: Vec<usize>,
}

impl<'m> ContinuousBackprojection<'m> {
    fn from_factor(model: &'m HybridModel, factor: CFactor) -> Self {
        let scope = match &factor {
            CFactor::Monomial(ds) => parents_of(model, ds.iter().map(|(v, _)| *v)),
            CFactor::Pwl(ps) => parents_of(model, ps.iter().map(|(v, _)| *v)),
        };
        Self { model, factor, scope }
    }

    pub fn scope(&self) -> &[usize] {
        &self.scope
    }

    /// Product over children of `E[x'^m]`, each a Gamma ratio
    /// (component-weighted for mixtures), or of `E[pwl(x')]`.
    pub fn eval(&self, p: &Point) -> f64 {
        match &self.factor {
            CFactor::Monomial(ds) => ds
                .iter()
                .map(|&(child, m)| self.expect(child, p, |a, b| beta_moment(a, b, m)))
                .product(),
            CFactor::Pwl(ps) => ps
                .iter()
                .map(|(child, f)| self.expect(*child, p, |a, b| f.beta_expectation(a, b)))
                .product(),
        }
    }

    #[inline]
    fn expect(&self, child: usize, p: &Point, per_beta: impl Fn(f64, f64) -> f64) -> f64 {
        match self.model.transition(child) {
            Transition::Continuous(cs) => cs
                .iter()
                .map(|c| {
                    let (a, b) = c.shape(p);
                    c.weight * per_beta(a, b)
                })
                .sum(),
            Transition::Discrete { .. } => unreachable!("continuous factor over discrete child"),
        }
    }

    /// Upper bound on `sup |∂g_C/∂u|`.
    ///
    /// For Lipschitz `c` with constant `L`, `|∂E[c(X)]/∂h1| ≤ L·h2/(h1+h2)²`
    /// and `|∂E[c(X)]/∂h2| ≤ L·h1/(h1+h2)²`, because Beta(h1, h2) is
    /// stochastically increasing in `h1` and decreasing in `h2`; both are
    /// bounded by `L / (h1 + h2)_min`.
    pub(crate) fn derivative_bound(&self, var: usize) -> f64 {
        let bounds: Vec<(usize, f64, f64)> = match &self.factor {
            CFactor::Monomial(ds) => ds.iter().map(|&(v, m)| (v, 1.0, f64::from(m))).collect(),
            CFactor::Pwl(ps) => ps.iter().map(|(v, f)| (*v, f.max_abs(), f.max_abs_slope())).collect(),
        };
        let mut total = 0.0;
        for (j, &(child, _, lip)) in bounds.iter().enumerate() {
            let others: f64 = bounds
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != j)
                .map(|(_, b)| b.1)
                .product();
            if let Transition::Continuous(cs) = self.model.transition(child) {
                let per: f64 = cs
                    .iter()
                    .map(|c| {
                        let dh = c.h1().derivative_bound(var) + c.h2().derivative_bound(var);
                        if dh == 0.0 {
                            return 0.0;
                        }
                        let smin = c.h1().range().0.max(c.floor()) + c.h2().range().0.max(c.floor());
                        c.weight * lip * dh / smin
                    })
                    .sum();
                total += others * per;
            }
        }
        total
    }

    fn sup(&self) -> f64 {
        match &self.factor {
            CFactor::Monomial(_) => 1.0,
            CFactor::Pwl(ps) => ps.iter().map(|(_, f)| f.max_abs()).product(),
        }
    }
}

/// `g(x, a) = g_D(x, a) · g_C(x, a)`.
#[derive(Debug, Clone)]
pub struct Backprojection<'m> {
    discrete: DiscreteBackprojection<'m>,
    continuous: ContinuousBackprojection<'m>,
    scope: Vec<usize>,
}

impl<'m> Backprojection<'m> {
    pub fn new(model: &'m HybridModel, basis: &Basis) -> Self {
        let discrete = DiscreteBackprojection::from_parts(model, basis.discrete.clone(), basis.table.clone());
        let continuous = ContinuousBackprojection::from_factor(model, basis.continuous.clone());
        let scope = discrete
            .scope
            .iter()
            .chain(&continuous.scope)
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        Self {
            discrete,
            continuous,
            scope,
        }
    }

    pub fn scope(&self) -> &[usize] {
        &self.scope
    }

    #[inline]
    pub fn eval(&self, p: &Point) -> f64 {
        let d = self.discrete.eval(p);
        if d == 0.0 {
            return 0.0;
        }
        d * self.continuous.eval(p)
    }

    pub(crate) fn derivative_bound(&self, var: usize) -> f64 {
        let dmax = self.discrete.table.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        dmax * self.continuous.derivative_bound(var) + self.continuous.sup() * self.discrete.derivative_bound(var)
    }
}

/// Discrete-factor backprojection. Errors if the factor's scope contains a
/// continuous variable.
pub fn backproject_discrete<'m>(model: &'m HybridModel, factor: &DiscreteFactor) -> Result<DiscreteBackprojection<'m>> {
    let (children, table) = resolve_discrete(model, factor)?;
    Ok(DiscreteBackprojection::from_parts(model, children, table))
}

/// Closed-form backprojection of `Π_j x_j^{m_j}`. Errors on a positive
/// degree for a discrete variable.
pub fn backproject_monomial<'m>(
    model: &'m HybridModel,
    degrees: &BTreeMap<String, u32>,
) -> Result<ContinuousBackprojection<'m>> {
    let ds = resolve_monomial(model, degrees)?;
    Ok(ContinuousBackprojection::from_factor(model, CFactor::Monomial(ds)))
}

/// Backprojection of a product of 1-D piecewise-linear factors.
pub fn backproject_piecewise_linear<'m>(
    model: &'m HybridModel,
    pieces: &[PiecewiseLinear],
) -> Result<ContinuousBackprojection<'m>> {
    let ps: Vec<(usize, Pwl)> = resolve_pwl(model, pieces)?;
    Ok(ContinuousBackprojection::from_factor(model, CFactor::Pwl(ps)))
}

/// `F(x, a) = f(x) − γ·g(x, a)`.
#[derive(Debug, Clone)]
pub struct ConstraintFunction<'m> {
    basis: Basis,
    backprojection: Backprojection<'m>,
    discount: f64,
    scope: Vec<usize>,
}

pub fn constraint_function<'m>(model: &'m HybridModel, basis: &Basis) -> ConstraintFunction<'m> {
    let backprojection = Backprojection::new(model, basis);
    let scope = basis
        .scope()
        .into_iter()
        .chain(backprojection.scope().iter().copied())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    ConstraintFunction {
        basis: basis.clone(),
        backprojection,
        discount: model.discount(),
        scope,
    }
}

impl<'m> ConstraintFunction<'m> {
    /// Union of the basis scope and the backprojection scope.
    pub fn scope(&self) -> &[usize] {
        &self.scope
    }

    pub fn backprojection(&self) -> &Backprojection<'m> {
        &self.backprojection
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    #[inline]
    pub fn eval(&self, p: &Point) -> f64 {
        self.basis.eval(p.x) - self.discount * self.backprojection.eval(p)
    }

    /// Upper bound on `sup |∂F/∂var|` for a continuous state or action variable.
    pub fn derivative_bound(&self, var: usize) -> f64 {
        let mut own = 0.0;
        let bounds = self.basis.continuous_bounds();
        if let Some(j) = bounds.iter().position(|b| b.0 == var) {
            let others: f64 = bounds.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, b)| b.1).product();
            own = self.basis.discrete_max_abs() * bounds[j].2 * others;
        }
        own + self.discount * self.backprojection.derivative_bound(var)
    }
}
