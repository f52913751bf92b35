use std::path::PathBuf;

use halp::lp::SearchMode;
use halp::policy::{HeuristicKind, RolloutOptions};

use crate::error::{CliError, Result};

/// Everything one solve-and-evaluate study needs.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub model: PathBuf,
    pub basis: PathBuf,
    pub eps: Vec<f64>,
    pub search: SearchMode,
    pub tol: f64,
    pub max_iterations: usize,
    pub rollout: RolloutOptions,
    pub baselines: Vec<HeuristicKind>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(e) = self.eps.iter().find(|&&e| !(e > 0.0 && e <= 1.0)) {
            return Err(CliError::Misuse(format!("eps must lie in (0, 1], got {e}")));
        }
        if self.rollout.trajectories == 0 || self.rollout.horizon == 0 {
            return Err(CliError::Misuse("trajectories and horizon must be at least 1".into()));
        }
        if !(self.tol >= 0.0) {
            return Err(CliError::Misuse(format!("tolerance must be non-negative, got {}", self.tol)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> ExperimentConfig {
        ExperimentConfig {
            model: "m.json".into(),
            basis: "b.json".into(),
            eps: vec![0.5, 0.25],
            search: SearchMode::Exhaustive,
            tol: 1e-6,
            max_iterations: 100,
            rollout: RolloutOptions::default(),
            baselines: vec![],
        }
    }

    #[test]
    fn eps_must_be_in_unit_interval() {
        assert!(config().validate().is_ok());
        for bad in [0.0, -0.5, 1.5, f64::NAN] {
            let c = ExperimentConfig { eps: vec![bad], ..config() };
            assert!(c.validate().is_err(), "{bad}");
        }
    }

    #[test]
    fn rollouts_need_trajectories() {
        let mut c = config();
        c.rollout.trajectories = 0;
        assert!(c.validate().is_err());
    }
}
