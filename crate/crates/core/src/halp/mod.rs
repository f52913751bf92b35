//! The ε-HALP: grid discretization, program assembly, solving, and
//! δ-infeasibility measurement.

mod grid;
mod program;
mod solve;

pub use grid::{grid_count, EpsGrid};
pub use program::{build_halp, HalpProgram};
pub(crate) use program::{GridField, ScopeTable};
pub use solve::{
    measure_infeasibility, resolution_for_delta, solve_halp, DeltaProbe, Diagnostics, HalpSolution, Probe, SolveOptions,
};
