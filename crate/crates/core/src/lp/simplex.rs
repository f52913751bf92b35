//! Dense dual simplex over inequality rows `a·w ≥ b` with box bounds.
//!
//! The basis is a set of `n` active rows; the vertex `w` solves them as
//! equalities and their multipliers `λ = M⁻ᵀ c` stay non-negative
//! throughout. Adding rows keeps the current basis dual feasible, which is
//! what makes warm starts across constraint generation rounds cheap.

use crate::{Error, Result};

/// Bounds at or beyond this magnitude are treated as infinite.
pub(crate) const INFINITE_BOUND: f64 = 1e9;
const FEAS_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-10;
const REFACTOR_EVERY: usize = 100;
const STALL_LIMIT: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum RowId {
    Lower(usize),
    Upper(usize),
    Con(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Outcome {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub(crate) struct DualSimplex {
    n: usize,
    c: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    lo_artificial: Vec<bool>,
    hi_artificial: Vec<bool>,
    rows: Vec<(Vec<f64>, f64)>,
    norms: Vec<f64>,
    basis: Vec<RowId>,
    binv: Vec<f64>,
    w: Vec<f64>,
    since_refactor: usize,
    pub(crate) pivots: usize,
}

impl DualSimplex {
    pub(crate) fn new(c: Vec<f64>, lo: &[f64], hi: &[f64]) -> Self {
        let n = c.len();
        let clamp_lo: Vec<f64> = lo.iter().map(|&l| l.max(-INFINITE_BOUND)).collect();
        let clamp_hi: Vec<f64> = hi.iter().map(|&h| h.min(INFINITE_BOUND)).collect();
        let basis: Vec<RowId> = (0..n)
            .map(|j| if c[j] >= 0.0 { RowId::Lower(j) } else { RowId::Upper(j) })
            .collect();
        let mut binv = vec![0.0; n * n];
        for (j, r) in basis.iter().enumerate() {
            binv[j * n + j] = if matches!(r, RowId::Lower(_)) { 1.0 } else { -1.0 };
        }
        let mut s = Self {
            n,
            c,
            lo_artificial: lo.iter().map(|&l| l <= -INFINITE_BOUND).collect(),
            hi_artificial: hi.iter().map(|&h| h >= INFINITE_BOUND).collect(),
            lo: clamp_lo,
            hi: clamp_hi,
            rows: vec![],
            norms: vec![],
            basis,
            binv,
            w: vec![0.0; n],
            since_refactor: 0,
            pivots: 0,
        };
        s.update_w();
        s
    }

    pub(crate) fn add_row(&mut self, a: Vec<f64>, b: f64) {
        let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
        self.rows.push((a, b));
        self.norms.push(norm);
    }

    pub(crate) fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub(crate) fn w(&self) -> &[f64] {
        &self.w
    }

    pub(crate) fn objective(&self) -> f64 {
        dot(&self.c, &self.w)
    }

    fn row(&self, r: RowId) -> (Vec<f64>, f64) {
        match r {
            RowId::Con(i) => self.rows[i].clone(),
            RowId::Lower(j) => {
                let mut e = vec![0.0; self.n];
                e[j] = 1.0;
                (e, self.lo[j])
            }
            RowId::Upper(j) => {
                let mut e = vec![0.0; self.n];
                e[j] = -1.0;
                (e, -self.hi[j])
            }
        }
    }

    fn rhs(&self, r: RowId) -> f64 {
        match r {
            RowId::Con(i) => self.rows[i].1,
            RowId::Lower(j) => self.lo[j],
            RowId::Upper(j) => -self.hi[j],
        }
    }

    fn update_w(&mut self) {
        let n = self.n;
        let b: Vec<f64> = self.basis.iter().map(|&r| self.rhs(r)).collect();
        for i in 0..n {
            self.w[i] = (0..n).map(|k| self.binv[i * n + k] * b[k]).sum();
        }
    }

    /// `Binvᵀ v`.
    fn binv_t(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n];
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0.0 {
                continue;
            }
            let row = &self.binv[i * n..(i + 1) * n];
            for (o, &b) in out.iter_mut().zip(row) {
                *o += b * vi;
            }
        }
        out
    }

    fn refactor(&mut self) -> Result<()> {
        let n = self.n;
        let mut m = vec![0.0; n * n];
        for (k, &r) in self.basis.iter().enumerate() {
            let (a, _) = self.row(r);
            m[k * n..(k + 1) * n].copy_from_slice(&a);
        }
        self.binv = invert(m, n).ok_or_else(|| Error::Numerical("singular basis".into()))?;
        self.since_refactor = 0;
        self.update_w();
        Ok(())
    }

    /// Scaled violation of every non-basic row; returns the entering row.
    fn entering(&self, bland: bool) -> Option<RowId> {
        let mut best: Option<(RowId, f64)> = None;
        let mut consider = |r: RowId, viol: f64, scale: f64| {
            if viol <= FEAS_TOL * (1.0 + scale) || self.basis.contains(&r) {
                return;
            }
            if bland {
                if best.is_none() {
                    best = Some((r, viol));
                }
            } else if best.is_none_or(|(_, v)| viol > v) {
                best = Some((r, viol));
            }
        };
        for j in 0..self.n {
            consider(RowId::Lower(j), self.lo[j] - self.w[j], self.lo[j].abs().min(1.0));
            consider(RowId::Upper(j), self.w[j] - self.hi[j], self.hi[j].abs().min(1.0));
        }
        for (i, (a, b)) in self.rows.iter().enumerate() {
            let viol = b - dot(a, &self.w);
            if viol > FEAS_TOL {
                consider(RowId::Con(i), viol / self.norms[i], 0.0);
            }
        }
        best.map(|(r, _)| r)
    }

    pub(crate) fn solve(&mut self) -> Result<Outcome> {
        let n = self.n;
        let cap = 20_000 + 50 * (self.rows.len() + 2 * n);
        let mut stall = 0usize;
        let mut iters = 0usize;
        loop {
            let bland = stall >= STALL_LIMIT;
            let Some(q) = self.entering(bland) else {
                return Ok(self.finish());
            };
            iters += 1;
            if iters > cap {
                return Err(Error::Numerical(format!("dual simplex did not converge in {cap} pivots")));
            }
            let (aq, bq) = self.row(q);
            let u = self.binv_t(&aq);
            let lambda = self.binv_t(&self.c);
            let umax = u.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..n {
                if u[r] <= PIVOT_TOL * umax.max(1.0) {
                    continue;
                }
                let t = lambda[r].max(0.0) / u[r];
                leave = match leave {
                    None => Some((r, t)),
                    Some((p, tp)) => {
                        let tie = (t - tp).abs() <= 1e-12 * (1.0 + tp.abs());
                        let better = if tie {
                            if bland {
                                self.basis[r] < self.basis[p]
                            } else {
                                u[r] > u[p]
                            }
                        } else {
                            t < tp
                        };
                        if better { Some((r, t)) } else { Some((p, tp)) }
                    }
                };
            }
            let Some((p, t)) = leave else {
                return Ok(Outcome::Infeasible);
            };
            let gain = t * (bq - dot(&aq, &self.w));
            stall = if gain <= 1e-12 { stall + 1 } else { 0 };

            let up = u[p];
            for i in 0..n {
                let row = &mut self.binv[i * n..(i + 1) * n];
                let s = row[p] / up;
                if s != 0.0 {
                    for (k, v) in row.iter_mut().enumerate() {
                        if k != p {
                            *v -= u[k] * s;
                        }
                    }
                }
                row[p] = s;
            }
            self.basis[p] = q;
            self.pivots += 1;
            self.since_refactor += 1;
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
            } else {
                self.update_w();
            }
        }
    }

    fn finish(&self) -> Outcome {
        let lambda = self.binv_t(&self.c);
        for (k, r) in self.basis.iter().enumerate() {
            let artificial = match *r {
                RowId::Lower(j) => self.lo_artificial[j],
                RowId::Upper(j) => self.hi_artificial[j],
                RowId::Con(_) => false,
            };
            if artificial && lambda[k] > 1e-9 {
                return Outcome::Unbounded;
            }
        }
        Outcome::Optimal
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gauss-Jordan inverse with partial pivoting; `None` if singular.
fn invert(mut m: Vec<f64>, n: usize) -> Option<Vec<f64>> {
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| m[a * n + col].abs().total_cmp(&m[b * n + col].abs()))?;
        if m[piv * n + col].abs() < 1e-14 {
            return None;
        }
        if piv != col {
            for k in 0..n {
                m.swap(piv * n + k, col * n + k);
                inv.swap(piv * n + k, col * n + k);
            }
        }
        let d = m[col * n + col];
        for k in 0..n {
            m[col * n + k] /= d;
            inv[col * n + k] /= d;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = m[r * n + col];
            if f != 0.0 {
                for k in 0..n {
                    m[r * n + k] -= f * m[col * n + k];
                    inv[r * n + k] -= f * inv[col * n + k];
                }
            }
        }
    }
    Some(inv)
}
