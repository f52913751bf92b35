//! Reference computations for tests. Nothing here shares code with the
//! `halp` crate: every routine is a slow, direct method used to check the
//! closed forms and solvers there.

pub mod lp;
pub mod quad;
pub mod stats;
