//! Approximate linear programming for hybrid factored MDPs.
//!
//! Continuous state variables live on `[0, 1]` and evolve under beta
//! (or mixture-of-beta) conditional densities; discrete variables evolve
//! under normalised discriminant functions. Value functions are linear in
//! factored basis functions whose one-step expectations have closed forms,
//! which turns the approximate LP into a finite program once continuous
//! axes are restricted to a uniform grid.
//!
//! Module map:
//!
//! * [`model`]: model documents, validation, densities and sampling.
//! * [`basis`]: basis functions, backprojections, relevance weights.
//! * [`lp`]: dense dual-simplex LP engine and constraint generation.
//! * [`halp`]: grid construction, program assembly, infeasibility probes.
//! * [`policy`]: greedy policies, heuristics, rollouts, value iteration.
//! * [`irrigation`]: irrigation-network benchmark generator.

pub mod basis;
pub mod error;
pub mod halp;
pub mod irrigation;
pub mod lp;
pub mod model;
pub mod policy;
pub mod special;

pub use error::{Error, Result};
