pub mod evaluate;
pub mod generate;
pub mod infeasibility;
pub mod scaleup;
pub mod solve;
