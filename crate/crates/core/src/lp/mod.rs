//! Linear programs `min cᵀw  s.t.  a_k·w ≥ b_k,  lo ≤ w ≤ hi`, and a
//! constraint generation loop over implicitly indexed constraint families.

mod generation;
mod simplex;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use generation::{
    exhaustive_search, greedy_search, solve_with_generation, ConstraintOracle, GenerationOptions, GenerationResult,
    SearchMode, SlackField,
};
pub(crate) use generation::{flat_index, unflatten};
use simplex::{DualSimplex, Outcome};

use crate::{Error, Result};

/// Feasibility tolerance promised for reported optimal points.
pub const FEASIBILITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    /// `(a, b)` meaning `a·w ≥ b`.
    pub constraints: Vec<(Vec<f64>, f64)>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LinearProgram {
    /// Free variables (infinite box).
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            objective,
            constraints: vec![],
            lower: vec![f64::NEG_INFINITY; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn with_box(mut self, lo: f64, hi: f64) -> Self {
        self.lower.fill(lo);
        self.upper.fill(hi);
        self
    }

    pub fn add_constraint(&mut self, a: Vec<f64>, b: f64) {
        self.constraints.push((a, b));
    }

    pub fn dim(&self) -> usize {
        self.objective.len()
    }

    fn check(&self) -> Result<()> {
        let n = self.dim();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(Error::Misuse(format!("bounds must have {n} entries")));
        }
        if let Some(k) = self.constraints.iter().position(|(a, _)| a.len() != n) {
            return Err(Error::Misuse(format!("constraint {k} has {} coefficients, expected {n}", self.constraints[k].0.len())));
        }
        if let Some(j) = (0..n).find(|&j| !(self.lower[j] <= self.upper[j])) {
            return Err(Error::Misuse(format!("variable {j} has lower bound above upper bound")));
        }
        let finite = self.objective.iter().all(|v| v.is_finite())
            && self.constraints.iter().all(|(a, b)| b.is_finite() && a.iter().all(|v| v.is_finite()));
        if !finite {
            return Err(Error::Misuse("LP coefficients must be finite".into()));
        }
        Ok(())
    }

    /// Fixed-layout LP text (objective, constraint rows, bounds) readable by
    /// common external solvers.
    pub fn to_lp_text(&self) -> String {
        let mut s = String::from("Minimize\n obj:");
        write_terms(&mut s, &self.objective);
        s.push_str("\nSubject To\n");
        for (k, (a, b)) in self.constraints.iter().enumerate() {
            let _ = write!(s, " c{k}:");
            write_terms(&mut s, a);
            let _ = writeln!(s, " >= {}", fmt_num(*b));
        }
        s.push_str("Bounds\n");
        for j in 0..self.dim() {
            let (lo, hi) = (self.lower[j], self.upper[j]);
            if lo == f64::NEG_INFINITY && hi == f64::INFINITY {
                let _ = writeln!(s, " w{j} free");
            } else {
                let l = if lo == f64::NEG_INFINITY { "-inf".into() } else { fmt_num(lo) };
                let h = if hi == f64::INFINITY { "+inf".into() } else { fmt_num(hi) };
                let _ = writeln!(s, " {l} <= w{j} <= {h}");
            }
        }
        s.push_str("End\n");
        s
    }
}

fn fmt_num(v: f64) -> String {
    format!("{v:?}")
}

fn write_terms(s: &mut String, a: &[f64]) {
    let mut any = false;
    for (j, &v) in a.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let sign = if v < 0.0 { '-' } else { '+' };
        if any || v < 0.0 {
            let _ = write!(s, " {sign}");
        }
        let _ = write!(s, " {} w{j}", fmt_num(v.abs()));
        any = true;
    }
    if !any {
        s.push_str(" 0 w0");
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Last vertex visited; meaningful only when optimal.
    pub w: Vec<f64>,
    pub objective: f64,
}

/// Solves `lp` with the dual simplex. Infinite bounds are replaced by a
/// large artificial box; an optimum resting on one is reported unbounded.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    lp.check()?;
    let mut s = DualSimplex::new(lp.objective.clone(), &lp.lower, &lp.upper);
    for (a, b) in &lp.constraints {
        s.add_row(a.clone(), *b);
    }
    let status = match s.solve()? {
        Outcome::Optimal => LpStatus::Optimal,
        Outcome::Infeasible => LpStatus::Infeasible,
        Outcome::Unbounded => LpStatus::Unbounded,
    };
    Ok(LpSolution {
        status,
        w: s.w().to_vec(),
        objective: s.objective(),
    })
}
