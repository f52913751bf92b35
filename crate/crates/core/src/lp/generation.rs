//! Constraint generation against an oracle whose constraints are indexed by
//! the points of a finite product grid.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::simplex::{dot, DualSimplex, Outcome};
use crate::{Error, Result};

/// `slack(z) = row(z)·w − R(z)` for a fixed `w`. Negative slack is a violation.
pub trait SlackField: Sync {
    fn slack(&self, z: &[usize]) -> f64;

    /// Slack along one axis with the other coordinates of `z` held fixed;
    /// `out[v]` is the slack at `z` with `z[axis] = v`.
    fn axis_profile(&self, z: &[usize], axis: usize, out: &mut [f64]) {
        let mut p = z.to_vec();
        for (v, o) in out.iter_mut().enumerate() {
            p[axis] = v;
            *o = self.slack(&p);
        }
    }

    /// A faster exact minimizer, if the field has structure to exploit.
    /// Must be deterministic; which minimizer is returned on ties is up to
    /// the field.
    fn exhaustive_min(&self, _shape: &[usize]) -> Option<(usize, f64)> {
        None
    }
}

/// Implicit constraint family `row(z)·w ≥ R(z)` over the points `z` of a
/// grid with axis sizes `shape()`. Points are flattened row-major with the
/// last axis fastest.
pub trait ConstraintOracle: Sync {
    fn dim(&self) -> usize;
    fn shape(&self) -> &[usize];
    /// `(F(z), R(z))`.
    fn row(&self, z: &[usize]) -> (Vec<f64>, f64);

    fn slack_field<'a>(&'a self, w: &'a [f64]) -> Box<dyn SlackField + 'a> {
        Box::new(Direct { oracle: self, w })
    }

    fn violation(&self, w: &[f64], z: &[usize]) -> f64 {
        let (a, r) = self.row(z);
        r - dot(&a, w)
    }

    fn n_points(&self) -> u128 {
        self.shape().iter().map(|&s| s as u128).product()
    }
}

struct Direct<'a, O: ?Sized> {
    oracle: &'a O,
    w: &'a [f64],
}

impl<O: ConstraintOracle + ?Sized> SlackField for Direct<'_, O> {
    fn slack(&self, z: &[usize]) -> f64 {
        -self.oracle.violation(self.w, z)
    }
}

pub(crate) fn flat_index(shape: &[usize], z: &[usize]) -> usize {
    z.iter().zip(shape).fold(0, |acc, (&v, &s)| acc * s + v)
}

pub(crate) fn unflatten(shape: &[usize], mut flat: usize, z: &mut [usize]) {
    for k in (0..shape.len()).rev() {
        z[k] = flat % shape[k];
        flat /= shape[k];
    }
}

fn advance(shape: &[usize], z: &mut [usize]) {
    for k in (0..shape.len()).rev() {
        z[k] += 1;
        if z[k] < shape[k] {
            return;
        }
        z[k] = 0;
    }
}

/// Keeps the smaller slack, the lower flat index on exact ties.
fn better(a: (usize, f64), b: (usize, f64)) -> (usize, f64) {
    if b.1 < a.1 || (b.1 == a.1 && b.0 < a.0) {
        b
    } else {
        a
    }
}

/// Point of minimum slack over the whole grid: `(flat index, slack)`.
pub fn exhaustive_search(field: &dyn SlackField, shape: &[usize]) -> Result<(usize, f64)> {
    let total: u128 = shape.iter().map(|&s| s as u128).product();
    if total == 0 {
        return Err(Error::Misuse("empty search grid".into()));
    }
    if total > usize::MAX as u128 {
        return Err(Error::TooLarge(format!("grid of {total} points cannot be indexed")));
    }
    if let Some(best) = field.exhaustive_min(shape) {
        return Ok(best);
    }
    if total > 1u128 << 40 {
        return Err(Error::TooLarge(format!("exhaustive sweep over {total} points")));
    }
    let total = total as usize;
    let chunk = 1usize << 14;
    let n_chunks = total.div_ceil(chunk);
    let best = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * chunk;
            let end = (start + chunk).min(total);
            let mut z = vec![0; shape.len()];
            unflatten(shape, start, &mut z);
            let mut best = (start, f64::INFINITY);
            for flat in start..end {
                let s = field.slack(&z);
                if s < best.1 {
                    best = (flat, s);
                }
                advance(shape, &mut z);
            }
            best
        })
        .reduce(|| (usize::MAX, f64::INFINITY), better);
    Ok(best)
}

/// Coordinate-wise descent of the slack from `restarts` random starts.
/// Each sweep moves one axis at a time to its minimizing value (lowest
/// value on ties) until a full sweep makes no strict improvement.
pub fn greedy_search(field: &dyn SlackField, shape: &[usize], restarts: usize, rng: &mut impl Rng) -> (usize, f64) {
    let maxlen = shape.iter().copied().max().unwrap_or(1);
    let mut profile = vec![0.0; maxlen];
    let mut best = (usize::MAX, f64::INFINITY);
    for _ in 0..restarts.max(1) {
        let mut z: Vec<usize> = shape.iter().map(|&s| rng.random_range(0..s)).collect();
        let mut cur = field.slack(&z);
        loop {
            let mut improved = false;
            for axis in 0..shape.len() {
                if shape[axis] < 2 {
                    continue;
                }
                let prof = &mut profile[..shape[axis]];
                field.axis_profile(&z, axis, prof);
                let (v, s) = prof
                    .iter()
                    .enumerate()
                    .fold((z[axis], cur), |(bv, bs), (v, &s)| if s < bs { (v, s) } else { (bv, bs) });
                if v != z[axis] && s < cur {
                    z[axis] = v;
                    cur = s;
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }
        best = better(best, (flat_index(shape, &z), cur));
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    /// Sweep every grid point.
    Exhaustive,
    /// Coordinate descent with random restarts. With `verify`, a final
    /// exhaustive sweep confirms (or refutes) convergence.
    Greedy { restarts: usize, verify: bool },
}

impl SearchMode {
    pub fn greedy() -> Self {
        Self::Greedy {
            restarts: 5,
            verify: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GenerationOptions {
    pub search: SearchMode,
    /// Stop once the largest violation found is at most this.
    pub tol: f64,
    pub max_iterations: usize,
    /// Random grid points whose constraints seed the first LP.
    pub seed_points: usize,
    pub seed: u64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl GenerationOptions {
    pub fn new(search: SearchMode, bound: f64, dim: usize) -> Self {
        Self {
            search,
            tol: 1e-6,
            max_iterations: 20_000,
            seed_points: 32,
            seed: 0,
            lower: vec![-bound; dim],
            upper: vec![bound; dim],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationResult {
    pub weights: Vec<f64>,
    pub objective: f64,
    /// Constraints in the final LP, seeds included.
    pub added_constraints: usize,
    /// Flat grid indices of those constraints, in insertion order.
    pub points: Vec<usize>,
    pub iterations: usize,
    /// Largest violation found by the last search.
    pub max_violation: f64,
    /// True when the last search was an exhaustive sweep.
    pub certified: bool,
    /// LP objective after each solve.
    pub objective_trace: Vec<f64>,
    pub pivots: usize,
}

/// Minimizes `objective·w` subject to every oracle constraint, adding the
/// most violated one found per round until none exceeds `tol`.
pub fn solve_with_generation(
    objective: &[f64],
    oracle: &dyn ConstraintOracle,
    opts: &GenerationOptions,
) -> Result<GenerationResult> {
    let n = oracle.dim();
    if objective.len() != n || opts.lower.len() != n || opts.upper.len() != n {
        return Err(Error::Misuse(format!("objective and bounds must have {n} entries")));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Misuse("generation tolerance must be positive".into()));
    }
    let shape = oracle.shape().to_vec();
    if shape.contains(&0) {
        return Err(Error::Misuse("empty search grid".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut lp = DualSimplex::new(objective.to_vec(), &opts.lower, &opts.upper);
    let mut seen = HashSet::new();
    let mut points = vec![];
    let mut z = vec![0; shape.len()];
    for _ in 0..opts.seed_points {
        for (zk, &s) in z.iter_mut().zip(&shape) {
            *zk = rng.random_range(0..s);
        }
        let flat = flat_index(&shape, &z);
        if seen.insert(flat) {
            let (a, b) = oracle.row(&z);
            lp.add_row(a, b);
            points.push(flat);
        }
    }

    let mut trace = vec![];
    let mut iterations = 0;
    loop {
        match lp.solve()? {
            Outcome::Optimal => {}
            Outcome::Infeasible => return Err(Error::Infeasible),
            Outcome::Unbounded => return Err(Error::Unbounded),
        }
        let w = lp.w().to_vec();
        trace.push(lp.objective());
        let field = oracle.slack_field(&w);
        let (mut flat, mut slack) = match opts.search {
            SearchMode::Exhaustive => exhaustive_search(field.as_ref(), &shape)?,
            SearchMode::Greedy { restarts, .. } => greedy_search(field.as_ref(), &shape, restarts, &mut rng),
        };
        let mut certified = opts.search == SearchMode::Exhaustive;
        if -slack <= opts.tol {
            if let SearchMode::Greedy { verify: true, .. } = opts.search {
                (flat, slack) = exhaustive_search(field.as_ref(), &shape)?;
                certified = true;
            }
        }
        drop(field);
        let violation = (-slack).max(0.0);
        if violation <= opts.tol {
            return Ok(GenerationResult {
                objective: lp.objective(),
                weights: w,
                added_constraints: lp.n_rows(),
                points,
                iterations,
                max_violation: violation,
                certified,
                objective_trace: trace,
                pivots: lp.pivots,
            });
        }
        if iterations >= opts.max_iterations {
            return Err(Error::BudgetExceeded {
                iterations,
                max_violation: violation,
                objective: lp.objective(),
                weights: w,
            });
        }
        if !seen.insert(flat) {
            return Err(Error::Numerical(format!(
                "grid point {flat} is violated by {violation:.3e} although its constraint is in the LP"
            )));
        }
        unflatten(&shape, flat, &mut z);
        let (a, b) = oracle.row(&z);
        lp.add_row(a, b);
        points.push(flat);
        iterations += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Rows given explicitly for every point of a grid.
    struct Table {
        shape: Vec<usize>,
        rows: Vec<(Vec<f64>, f64)>,
    }

    impl ConstraintOracle for Table {
        fn dim(&self) -> usize {
            self.rows[0].0.len()
        }
        fn shape(&self) -> &[usize] {
            &self.shape
        }
        fn row(&self, z: &[usize]) -> (Vec<f64>, f64) {
            self.rows[flat_index(&self.shape, z)].clone()
        }
    }

    #[test]
    fn flat_roundtrip() {
        let shape = [3, 1, 4];
        let mut z = [0; 3];
        for f in 0..12 {
            unflatten(&shape, f, &mut z);
            assert_eq!(flat_index(&shape, &z), f);
        }
    }

    #[test]
    fn single_point_family() {
        let t = Table {
            shape: vec![1],
            rows: vec![(vec![1.0], 3.0)],
        };
        let mut o = GenerationOptions::new(SearchMode::Exhaustive, 100.0, 1);
        o.seed_points = 0;
        let r = solve_with_generation(&[1.0], &t, &o).unwrap();
        assert!((r.weights[0] - 3.0).abs() < 1e-12);
        assert_eq!(r.added_constraints, 1);
        assert!(r.certified);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let t = Table {
            shape: vec![2, 2],
            rows: vec![(vec![1.0], 1.0), (vec![1.0], 2.0), (vec![1.0], 0.0), (vec![1.0], 2.0)],
        };
        let field = t.slack_field(&[0.0]);
        assert_eq!(exhaustive_search(field.as_ref(), &[2, 2]).unwrap(), (1, -2.0));
    }

    #[test]
    fn budget_reports_partial_solution() {
        let rows = (0..50).map(|k| (vec![1.0, k as f64 / 49.0], (k as f64 / 49.0).sqrt())).collect();
        let t = Table { shape: vec![50], rows };
        let mut o = GenerationOptions::new(SearchMode::Exhaustive, 10.0, 2);
        o.seed_points = 0;
        o.max_iterations = 1;
        match solve_with_generation(&[1.0, 0.5], &t, &o) {
            Err(Error::BudgetExceeded { weights, .. }) => assert_eq!(weights.len(), 2),
            other => panic!("{other:?}"),
        }
    }
}
