//! The ε-HALP as a constraint oracle over the grid.
//!
//! Every `F_i` and `R_j` depends on a few variables only, so each is
//! tabulated once over the grid restricted to its scope. A constraint row at
//! a grid point is then a handful of table lookups.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::basis::{constraint_function, relevance_weight, Basis, ConstraintFunction, StateRelevanceDensity};
use crate::lp::{ConstraintOracle, SlackField};
use crate::model::{HybridModel, Point};
use crate::{Error, Result};

use super::EpsGrid;

/// Largest single scope table we are willing to build.
const MAX_TABLE: usize = 1 << 26;

/// Values of a function over the grid restricted to `vars` (row-major,
/// last variable fastest).
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct ScopeTable {
    pub vars: Vec<usize>,
    pub strides: Vec<usize>,
    pub values: Vec<f64>,
}

impl ScopeTable {
    fn layout(vars: &[usize], shape: &[usize]) -> Result<(Vec<usize>, usize)> {
        let mut strides = vec![0; vars.len()];
        let mut size = 1usize;
        for (k, &v) in vars.iter().enumerate().rev() {
            strides[k] = size;
            size = size
                .checked_mul(shape[v])
                .filter(|&s| s <= MAX_TABLE)
                .ok_or_else(|| Error::TooLarge(format!("scope table over {} variables", vars.len())))?;
        }
        Ok((strides, size))
    }

    /// Tabulates `f(z)` over every restricted multi-index; coordinates of
    /// `z` outside `vars` stay 0.
    pub(crate) fn build(vars: &[usize], shape: &[usize], mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let (strides, size) = Self::layout(vars, shape)?;
        let mut z = vec![0usize; shape.len()];
        let values = (0..size)
            .map(|idx| {
                let mut rest = idx;
                for (k, &v) in vars.iter().enumerate() {
                    z[v] = rest / strides[k];
                    rest %= strides[k];
                }
                f(&z)
            })
            .collect();
        Ok(Self {
            vars: vars.to_vec(),
            strides,
            values,
        })
    }

    /// Tabulates `f` over the restricted grid; variables outside the scope
    /// are fixed at their first grid value.
    pub(crate) fn tabulate(vars: &[usize], grid: &EpsGrid, n_state: usize, f: impl Fn(&Point) -> f64 + Sync) -> Result<Self> {
        let shape = grid.shape();
        let (strides, size) = Self::layout(vars, shape)?;
        let values = (0..size)
            .into_par_iter()
            .map_init(
                || vec![0.0; shape.len()],
                |vals, idx| {
                    let mut rest = idx;
                    for (k, &v) in vars.iter().enumerate() {
                        vals[v] = grid.value(v, rest / strides[k]);
                        rest %= strides[k];
                    }
                    let (x, a) = vals.split_at(n_state);
                    f(&Point::new(x, a))
                },
            )
            .collect();
        Ok(Self {
            vars: vars.to_vec(),
            strides,
            values,
        })
    }

    #[inline]
    pub(crate) fn index(&self, z: &[usize]) -> usize {
        self.vars.iter().zip(&self.strides).map(|(&v, &s)| z[v] * s).sum()
    }

    #[inline]
    pub(crate) fn at(&self, z: &[usize]) -> f64 {
        self.values[self.index(z)]
    }

    /// Adds `other` (whose scope is a subset of ours) into every entry.
    fn absorb(&mut self, other: &ScopeTable, shape: &[usize]) {
        let pos: Vec<Option<usize>> = self
            .vars
            .iter()
            .map(|v| other.vars.iter().position(|u| u == v))
            .collect();
        let mut z = vec![0usize; shape.len()];
        for idx in 0..self.values.len() {
            let mut rest = idx;
            for (k, &v) in self.vars.iter().enumerate() {
                z[v] = rest / self.strides[k];
                rest %= self.strides[k];
            }
            let mut j = 0;
            for (k, p) in pos.iter().enumerate() {
                if let Some(p) = p {
                    j += z[self.vars[k]] * other.strides[*p];
                }
            }
            self.values[idx] += other.values[j];
        }
    }
}

/// `min Σ_i α_i w_i  s.t.  Σ_i w_i F_i(z) ≥ R(z)` for every grid point `z`.
pub struct HalpProgram<'m> {
    model: &'m HybridModel,
    bases: Vec<Basis>,
    functions: Vec<ConstraintFunction<'m>>,
    alphas: Vec<f64>,
    grid: EpsGrid,
    f_tables: Vec<ScopeTable>,
    r_tables: Vec<ScopeTable>,
}

/// Builds the program: relevance weights, constraint functions and their
/// per-scope grid tables.
pub fn build_halp<'m>(
    model: &'m HybridModel,
    bases: &[Basis],
    psi: &StateRelevanceDensity,
    eps: f64,
) -> Result<HalpProgram<'m>> {
    if bases.is_empty() {
        return Err(Error::Misuse("basis set is empty".into()));
    }
    let grid = EpsGrid::new(model, eps)?;
    let alphas = bases.iter().map(|b| relevance_weight(psi, b)).collect::<Result<Vec<_>>>()?;
    let functions: Vec<ConstraintFunction> = bases.iter().map(|b| constraint_function(model, b)).collect();
    let (f_tables, r_tables) = grid_tables(model, &functions, &grid)?;
    Ok(HalpProgram {
        model,
        bases: bases.to_vec(),
        functions,
        alphas,
        grid,
        f_tables,
        r_tables,
    })
}

/// Per-scope grid tables of every `F_i` and every reward factor.
pub(crate) fn grid_tables(
    model: &HybridModel,
    functions: &[ConstraintFunction],
    grid: &EpsGrid,
) -> Result<(Vec<ScopeTable>, Vec<ScopeTable>)> {
    let n_state = model.n_state();
    let f_tables = functions
        .iter()
        .map(|f| ScopeTable::tabulate(f.scope(), grid, n_state, |p| f.eval(p)))
        .collect::<Result<Vec<_>>>()?;
    let r_tables = model
        .rewards()
        .iter()
        .map(|r| {
            let mut scope: Vec<usize> = r.scope().collect();
            scope.sort_unstable();
            ScopeTable::tabulate(&scope, grid, n_state, |p| r.eval(p))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((f_tables, r_tables))
}

impl<'m> HalpProgram<'m> {
    pub fn model(&self) -> &'m HybridModel {
        self.model
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn grid(&self) -> &EpsGrid {
        &self.grid
    }

    pub fn bases(&self) -> &[Basis] {
        &self.bases
    }

    pub fn functions(&self) -> &[ConstraintFunction<'m>] {
        &self.functions
    }

    /// Scopes (joint variable indices) of each `F_i`.
    pub fn constraint_scopes(&self) -> Vec<Vec<usize>> {
        self.f_tables.iter().map(|t| t.vars.clone()).collect()
    }

    /// Default weight box `±max(R_max/(1−γ), 1)`.
    pub fn weight_bound(&self) -> f64 {
        default_weight_bound(self.model)
    }

    pub(crate) fn field(&self, w: &[f64]) -> Result<GridField> {
        GridField::new(&self.f_tables, &self.r_tables, w, self.grid.shape())
    }
}

pub(crate) fn default_weight_bound(model: &HybridModel) -> f64 {
    (model.reward_bound() / (1.0 - model.discount())).max(1.0)
}

impl ConstraintOracle for HalpProgram<'_> {
    fn dim(&self) -> usize {
        self.bases.len()
    }

    fn shape(&self) -> &[usize] {
        self.grid.shape()
    }

    fn row(&self, z: &[usize]) -> (Vec<f64>, f64) {
        let a = self.f_tables.iter().map(|t| t.at(z)).collect();
        let r = self.r_tables.iter().map(|t| t.at(z)).sum();
        (a, r)
    }

    fn slack_field<'a>(&'a self, w: &'a [f64]) -> Box<dyn SlackField + 'a> {
        Box::new(self.field(w).expect("field tables fit whenever the program's tables do"))
    }
}

/// `slack(z) = Σ_i w_i F_i(z) − R(z)` as a constant plus a sum of scope
/// tables, none of whose scopes contains another's.
pub(crate) struct GridField {
    offset: f64,
    groups: Vec<ScopeTable>,
    /// Groups whose scope contains each axis.
    touching: Vec<Vec<usize>>,
    /// Groups whose last variable is each axis.
    closing: Vec<Vec<usize>>,
    lexicographic: bool,
}

impl GridField {
    pub(crate) fn new(f_tables: &[ScopeTable], r_tables: &[ScopeTable], w: &[f64], shape: &[usize]) -> Result<Self> {
        let mut by_scope: BTreeMap<Vec<usize>, Vec<f64>> = BTreeMap::new();
        let terms = f_tables
            .iter()
            .zip(w)
            .map(|(t, &wi)| (t, wi))
            .chain(r_tables.iter().map(|t| (t, -1.0)));
        for (t, c) in terms {
            if c == 0.0 {
                continue;
            }
            let acc = by_scope.entry(t.vars.clone()).or_insert_with(|| vec![0.0; t.values.len()]);
            for (a, v) in acc.iter_mut().zip(&t.values) {
                *a += c * v;
            }
        }
        let mut offset = 0.0;
        let mut tables: Vec<ScopeTable> = vec![];
        for (vars, values) in by_scope {
            if vars.is_empty() {
                offset += values[0];
                continue;
            }
            let (strides, _) = ScopeTable::layout(&vars, shape)?;
            tables.push(ScopeTable { vars, strides, values });
        }
        // Fold each scope into a strict superset when one exists.
        tables.sort_by(|a, b| b.vars.len().cmp(&a.vars.len()).then(a.vars.cmp(&b.vars)));
        let mut groups: Vec<ScopeTable> = vec![];
        for t in tables {
            match groups.iter_mut().find(|g| t.vars.iter().all(|v| g.vars.contains(v))) {
                Some(g) => g.absorb(&t, shape),
                None => groups.push(t),
            }
        }
        let mut touching = vec![vec![]; shape.len()];
        let mut closing = vec![vec![]; shape.len()];
        for (g, t) in groups.iter().enumerate() {
            for &v in &t.vars {
                touching[v].push(g);
            }
            closing[*t.vars.iter().max().expect("non-empty scope")].push(g);
        }
        Ok(Self {
            offset,
            groups,
            touching,
            closing,
            lexicographic: false,
        })
    }

    /// Makes `exhaustive_min` return the lexicographically first minimizer.
    /// Elimination then runs in reverse axis order, which can be far more
    /// expensive than the default order.
    pub(crate) fn lexicographic(mut self) -> Self {
        self.lexicographic = true;
        self
    }

    /// Greedy order: repeatedly eliminate the axis whose bucket table would
    /// be smallest, lowest axis on ties.
    fn min_size_order(&self, shape: &[usize]) -> Vec<usize> {
        let d = shape.len();
        let mut adj = vec![std::collections::BTreeSet::new(); d];
        for g in &self.groups {
            for &u in &g.vars {
                for &v in &g.vars {
                    if u != v {
                        adj[u].insert(v);
                    }
                }
            }
        }
        let mut done = vec![false; d];
        let mut order = Vec::with_capacity(d);
        for _ in 0..d {
            let cost = |k: usize| adj[k].iter().fold(shape[k] as f64, |c, &v| c * shape[v] as f64);
            let k = (0..d)
                .filter(|&k| !done[k])
                .min_by(|&a, &b| cost(a).total_cmp(&cost(b)).then(a.cmp(&b)))
                .expect("axis left");
            let nb: Vec<usize> = adj[k].iter().copied().collect();
            for &u in &nb {
                adj[u].remove(&k);
                for &v in &nb {
                    if u != v {
                        adj[u].insert(v);
                    }
                }
            }
            done[k] = true;
            order.push(k);
        }
        order
    }

    /// Exact minimizer by min-sum bucket elimination along `order`.
    /// Back-substitution runs in reverse and takes the smallest optimal value
    /// of each axis; with `order` = highest axis first this yields the
    /// lexicographically first minimizer. `None` when an intermediate table
    /// would exceed the size cap.
    fn eliminate(&self, shape: &[usize], order: &[usize]) -> Option<Vec<usize>> {
        let d = shape.len();
        let mut rank = vec![0; d];
        for (r, &k) in order.iter().enumerate() {
            rank[k] = r;
        }
        let first = |vars: &[usize]| vars.iter().copied().min_by_key(|&v| rank[v]);
        let mut buckets: Vec<Vec<ScopeTable>> = vec![vec![]; d];
        for g in &self.groups {
            buckets[first(&g.vars)?].push(g.clone());
        }
        let mut choices: Vec<Option<ScopeTable>> = vec![None; d];
        for &k in order {
            let bucket = std::mem::take(&mut buckets[k]);
            if bucket.is_empty() {
                continue;
            }
            let mut vars: Vec<usize> = bucket.iter().flat_map(|t| t.vars.iter().copied()).filter(|&v| v != k).collect();
            vars.sort_unstable();
            vars.dedup();
            let (strides, size) = ScopeTable::layout(&vars, shape).ok()?;
            if size.checked_mul(shape[k])? > MAX_TABLE {
                return None;
            }
            let minimize = |idx: usize| {
                let mut z = vec![0usize; d];
                let mut rest = idx;
                for (j, &v) in vars.iter().enumerate() {
                    z[v] = rest / strides[j];
                    rest %= strides[j];
                }
                let mut best = (f64::INFINITY, 0usize);
                for v in 0..shape[k] {
                    z[k] = v;
                    let s: f64 = bucket.iter().map(|t| t.at(&z)).sum();
                    if s < best.0 {
                        best = (s, v);
                    }
                }
                best
            };
            let (mins, args): (Vec<f64>, Vec<usize>) = if size * shape[k] * bucket.len() >= 1 << 14 {
                (0..size).into_par_iter().map(minimize).unzip()
            } else {
                (0..size).map(minimize).unzip()
            };
            choices[k] = Some(ScopeTable {
                vars: vars.clone(),
                strides: strides.clone(),
                values: args.into_iter().map(|a| a as f64).collect(),
            });
            if let Some(next) = first(&vars) {
                buckets[next].push(ScopeTable {
                    vars,
                    strides,
                    values: mins,
                });
            }
        }
        let mut z = vec![0usize; d];
        for &k in order.iter().rev() {
            if let Some(c) = &choices[k] {
                z[k] = c.at(&z) as usize;
            }
        }
        Some(z)
    }

    fn dfs(&self, shape: &[usize], depth: usize, z: &mut [usize], partial: f64, best: &mut (usize, f64)) {
        let d = shape.len();
        for v in 0..shape[depth] {
            z[depth] = v;
            let s = partial + self.closing[depth].iter().map(|&g| self.groups[g].at(z)).sum::<f64>();
            if depth + 1 == d {
                if s < best.1 {
                    *best = (crate::lp::flat_index(shape, z), s);
                }
            } else {
                self.dfs(shape, depth + 1, z, s, best);
            }
        }
    }
}

impl SlackField for GridField {
    #[inline]
    fn slack(&self, z: &[usize]) -> f64 {
        self.offset + self.groups.iter().map(|g| g.at(z)).sum::<f64>()
    }

    fn axis_profile(&self, z: &[usize], axis: usize, out: &mut [f64]) {
        let base = self.slack(z) - self.touching[axis].iter().map(|&g| self.groups[g].at(z)).sum::<f64>();
        let mut p = z.to_vec();
        for (v, o) in out.iter_mut().enumerate() {
            p[axis] = v;
            *o = base + self.touching[axis].iter().map(|&g| self.groups[g].at(&p)).sum::<f64>();
        }
    }

    /// Variable elimination when its tables fit; otherwise a depth-first
    /// sweep in lexicographic order where each table is added once its last
    /// variable is fixed. Ties go to the lexicographically first point only
    /// in lexicographic mode.
    fn exhaustive_min(&self, shape: &[usize]) -> Option<(usize, f64)> {
        if shape.is_empty() {
            return Some((0, self.offset));
        }
        let order = if self.lexicographic {
            (0..shape.len()).rev().collect()
        } else {
            self.min_size_order(shape)
        };
        if let Some(z) = self.eliminate(shape, &order) {
            return Some((crate::lp::flat_index(shape, &z), self.slack(&z)));
        }
        let total: u128 = shape.iter().map(|&s| s as u128).product();
        (total <= 1 << 40).then(|| self.sweep(shape))
    }
}

impl GridField {
    fn sweep(&self, shape: &[usize]) -> (usize, f64) {
        (0..shape[0])
            .into_par_iter()
            .map(|v0| {
                let mut z = vec![0; shape.len()];
                z[0] = v0;
                let s0 = self.offset + self.closing[0].iter().map(|&g| self.groups[g].at(&z)).sum::<f64>();
                let mut best = (usize::MAX, f64::INFINITY);
                if shape.len() == 1 {
                    best = (v0, s0);
                } else {
                    self.dfs(shape, 1, &mut z, s0, &mut best);
                }
                best
            })
            .reduce(
                || (usize::MAX, f64::INFINITY),
                |a, b| if b.1 < a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a },
            )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(rng: &mut ChaCha8Rng, integer: bool) -> (GridField, Vec<usize>) {
        let d = rng.random_range(2..7);
        let shape: Vec<usize> = (0..d).map(|_| rng.random_range(1..5)).collect();
        let mut tables = vec![];
        for _ in 0..rng.random_range(1..8) {
            let mut vars: Vec<usize> = (0..d).filter(|_| rng.random_bool(0.4)).collect();
            vars.truncate(3);
            let t = ScopeTable::build(&vars, &shape, |_| {
                if integer {
                    rng.random_range(-2..3) as f64
                } else {
                    rng.random_range(-1.0..1.0)
                }
            })
            .unwrap();
            tables.push(t);
        }
        let w: Vec<f64> = tables.iter().map(|_| if integer { 1.0 } else { rng.random_range(0.5..2.0) }).collect();
        (GridField::new(&tables, &[], &w, &shape).unwrap(), shape)
    }

    #[test]
    fn elimination_matches_sweep() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for case in 0..300 {
            let (field, shape) = random_field(&mut rng, case % 2 == 0);
            let (flat_sweep, slack_sweep) = field.sweep(&shape);
            let (_, slack) = field.exhaustive_min(&shape).unwrap();
            assert!((slack - slack_sweep).abs() < 1e-12, "case {case}");
            let field = field.lexicographic();
            let (flat, slack) = field.exhaustive_min(&shape).unwrap();
            assert!((slack - slack_sweep).abs() < 1e-12, "case {case}");
            assert_eq!(flat, flat_sweep, "case {case}");
        }
    }
}
