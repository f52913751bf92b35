//! Compiled continuous expressions. Variables are addressed by their position
//! in the owning function's continuous scope.

use std::collections::HashMap;

use crate::special::{beta_segment_moments, gaussian_pdf};

use super::doc::ContinuousExpr;

/// 1-D piecewise-linear function on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pwl {
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl Pwl {
    /// Callers validate knots beforehand.
    pub(crate) fn new(knots: Vec<f64>, values: Vec<f64>) -> Self {
        debug_assert_eq!(knots.len(), values.len());
        Self { knots, values }
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, x: f64) -> f64 {
        let k = &self.knots;
        let x = x.clamp(0.0, 1.0);
        let seg = match k.partition_point(|&t| t <= x) {
            0 => 0,
            i if i >= k.len() => k.len() - 2,
            i => i - 1,
        };
        let t = (x - k[seg]) / (k[seg + 1] - k[seg]);
        self.values[seg] + t * (self.values[seg + 1] - self.values[seg])
    }

    pub fn slopes(&self) -> impl Iterator<Item = f64> + '_ {
        self.knots
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(k, v)| (v[1] - v[0]) / (k[1] - k[0]))
    }

    pub fn max_abs_slope(&self) -> f64 {
        self.slopes().fold(0.0, |m, s| m.max(s.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `E[f(X)]` for `X ~ Beta(a, b)`, segment by segment through the
    /// regularised incomplete beta function.
    pub fn beta_expectation(&self, a: f64, b: f64) -> f64 {
        let mut total = 0.0;
        for (seg, slope) in self.slopes().enumerate() {
            let (lo, hi) = (self.knots[seg], self.knots[seg + 1]);
            let (p, first) = beta_segment_moments(a, b, lo, hi);
            total += (self.values[seg] - slope * lo) * p + slope * first;
        }
        total
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Term {
    pub coef: f64,
    pub powers: Vec<(usize, u32)>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Gaussian {
    pub weight: f64,
    pub mean: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Expr {
    Constant(f64),
    Polynomial(Vec<Term>),
    PiecewiseLinear(Vec<(usize, Pwl)>),
    GaussianMixture(Vec<(usize, Gaussian)>),
}

/// Distribution of one continuous-scope position when taking expectations.
#[derive(Debug, Clone)]
pub(crate) enum PosDist {
    Point(f64),
    /// Weighted beta components `(weight, a, b)`.
    Beta(Vec<(f64, f64, f64)>),
}

impl PosDist {
    fn moment(&self, m: u32) -> f64 {
        match self {
            PosDist::Point(v) => v.powi(m as i32),
            PosDist::Beta(c) => c
                .iter()
                .map(|&(w, a, b)| w * crate::special::beta_moment(a, b, m))
                .sum(),
        }
    }

    fn pwl(&self, f: &Pwl) -> f64 {
        match self {
            PosDist::Point(v) => f.eval(*v),
            PosDist::Beta(c) => c.iter().map(|&(w, a, b)| w * f.beta_expectation(a, b)).sum(),
        }
    }
}

impl Expr {
    pub(crate) fn compile(e: &ContinuousExpr, scope: &[String]) -> Expr {
        let pos: HashMap<&str, usize> = scope.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        match e {
            ContinuousExpr::Constant { value } => Expr::Constant(*value),
            ContinuousExpr::Polynomial { terms } => Expr::Polynomial(
                terms
                    .iter()
                    .map(|t| Term {
                        coef: t.coef,
                        powers: t
                            .degrees
                            .iter()
                            .filter(|(_, &d)| d > 0)
                            .map(|(v, &d)| (pos[v.as_str()], d))
                            .collect(),
                    })
                    .collect(),
            ),
            ContinuousExpr::PiecewiseLinear { pieces } => Expr::PiecewiseLinear(
                pieces
                    .iter()
                    .map(|p| (pos[p.var.as_str()], Pwl::new(p.knots.clone(), p.values.clone())))
                    .collect(),
            ),
            ContinuousExpr::GaussianMixture { components } => Expr::GaussianMixture(
                components
                    .iter()
                    .map(|c| {
                        (
                            pos[c.var.as_str()],
                            Gaussian {
                                weight: c.weight,
                                mean: c.mean,
                                variance: c.variance,
                            },
                        )
                    })
                    .collect(),
            ),
        }
    }

    #[inline]
    pub(crate) fn eval(&self, val: impl Fn(usize) -> f64) -> f64 {
        match self {
            Expr::Constant(c) => *c,
            Expr::Polynomial(terms) => terms
                .iter()
                .map(|t| t.coef * t.powers.iter().map(|&(p, d)| val(p).powi(d as i32)).product::<f64>())
                .sum(),
            Expr::PiecewiseLinear(pieces) => pieces.iter().map(|(p, f)| f.eval(val(*p))).sum(),
            Expr::GaussianMixture(cs) => cs
                .iter()
                .map(|(p, g)| g.weight * gaussian_pdf(g.mean, g.variance, val(*p)))
                .sum(),
        }
    }

    /// Expectation when each position is independently distributed as given.
    /// `None` when no closed form exists (Gaussian terms under a beta).
    pub(crate) fn expectation(&self, dist: &[PosDist]) -> Option<f64> {
        match self {
            Expr::Constant(c) => Some(*c),
            Expr::Polynomial(terms) => Some(
                terms
                    .iter()
                    .map(|t| t.coef * t.powers.iter().map(|&(p, d)| dist[p].moment(d)).product::<f64>())
                    .sum(),
            ),
            Expr::PiecewiseLinear(pieces) => Some(pieces.iter().map(|(p, f)| dist[*p].pwl(f)).sum()),
            Expr::GaussianMixture(cs) => {
                let mut total = 0.0;
                for (p, g) in cs {
                    match &dist[*p] {
                        PosDist::Point(v) => total += g.weight * gaussian_pdf(g.mean, g.variance, *v),
                        PosDist::Beta(_) => return None,
                    }
                }
                Some(total)
            }
        }
    }

    /// Upper bound on `sup |∂e/∂u_pos|` over the unit cube.
    pub(crate) fn derivative_bound(&self, pos: usize) -> f64 {
        match self {
            Expr::Constant(_) => 0.0,
            Expr::Polynomial(terms) => terms
                .iter()
                .map(|t| {
                    let d = t.powers.iter().filter(|(p, _)| *p == pos).map(|(_, d)| *d).sum::<u32>();
                    t.coef.abs() * f64::from(d)
                })
                .sum(),
            Expr::PiecewiseLinear(pieces) => pieces
                .iter()
                .filter(|(p, _)| *p == pos)
                .map(|(_, f)| f.max_abs_slope())
                .sum(),
            Expr::GaussianMixture(cs) => cs
                .iter()
                .filter(|(p, _)| *p == pos)
                .map(|(_, g)| {
                    g.weight.abs() * (-0.5f64).exp() / (g.variance * (2.0 * std::f64::consts::PI).sqrt())
                })
                .sum(),
        }
    }

    /// Conservative `[lo, hi]` enclosure of the expression over the unit cube.
    pub(crate) fn range(&self) -> (f64, f64) {
        match self {
            Expr::Constant(c) => (*c, *c),
            Expr::Polynomial(terms) => terms.iter().fold((0.0, 0.0), |(lo, hi), t| {
                if t.powers.is_empty() {
                    (lo + t.coef, hi + t.coef)
                } else {
                    (lo + t.coef.min(0.0), hi + t.coef.max(0.0))
                }
            }),
            Expr::PiecewiseLinear(pieces) => pieces
                .iter()
                .fold((0.0, 0.0), |(lo, hi), (_, f)| (lo + f.min_value(), hi + f.max_value())),
            Expr::GaussianMixture(cs) => cs.iter().fold((0.0, 0.0), |(lo, hi), (_, g)| {
                let peak = g.weight * gaussian_pdf(g.mean, g.variance, g.mean);
                (lo + peak.min(0.0), hi + peak.max(0.0))
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hat() -> Pwl {
        Pwl::new(vec![0.0, 0.5, 1.0], vec![0.0, 1.0, 0.0])
    }

    #[test]
    fn pwl_eval_interpolates_and_clamps() {
        let f = hat();
        assert_eq!(f.eval(0.25), 0.5);
        assert_eq!(f.eval(0.5), 1.0);
        assert_eq!(f.eval(1.0), 0.0);
        assert_eq!(f.eval(1.5), 0.0);
        assert_eq!(f.max_abs_slope(), 2.0);
    }

    #[test]
    fn pwl_expectation_of_identity_is_mean() {
        let id = Pwl::new(vec![0.0, 1.0], vec![0.0, 1.0]);
        assert!((id.beta_expectation(1.0, 1.0) - 0.5).abs() < 1e-14);
        assert!((id.beta_expectation(3.0, 7.0) - 0.3).abs() < 1e-13);
    }

    #[test]
    fn range_encloses_values() {
        let e = Expr::Polynomial(vec![
            Term { coef: 2.0, powers: vec![] },
            Term { coef: -1.0, powers: vec![(0, 2)] },
        ]);
        assert_eq!(e.range(), (1.0, 2.0));
        assert_eq!(e.derivative_bound(0), 2.0);
    }
}
