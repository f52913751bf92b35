use serde::{Deserialize, Serialize};

use crate::model::HybridModel;
use crate::{Error, Result};

/// Number of equally spaced values on `[0,1]` so that every point is within
/// `eps` of one: `ceil(1/(2·eps)) + 1`.
pub fn grid_count(eps: f64) -> Result<usize> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Misuse(format!("grid resolution {eps} must lie in (0, 1]")));
    }
    let half = 1.0 / (2.0 * eps);
    // Absorb rounding noise so that e.g. eps = 0.1 gives 6 points, not 7.
    Ok((half - 1e-9).ceil().max(1.0) as usize + 1)
}

/// Per-variable grid over every state and action variable of a model:
/// `k/(count−1)` for continuous variables, the full domain for discrete ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsGrid {
    pub eps: f64,
    /// Points per continuous axis.
    pub count: usize,
    shape: Vec<usize>,
    continuous: Vec<bool>,
}

impl EpsGrid {
    pub fn new(model: &HybridModel, eps: f64) -> Result<Self> {
        let count = grid_count(eps)?;
        let mut shape = vec![];
        let mut continuous = vec![];
        for v in 0..model.n_vars() {
            match model.domain_size(v) {
                Some(d) => {
                    shape.push(d);
                    continuous.push(false);
                }
                None => {
                    shape.push(count);
                    continuous.push(true);
                }
            }
        }
        Ok(Self {
            eps,
            count,
            shape,
            continuous,
        })
    }

    /// Axis sizes over the joint variable index.
    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    #[inline]
    pub fn value(&self, var: usize, k: usize) -> f64 {
        if self.continuous[var] {
            k as f64 / (self.count - 1) as f64
        } else {
            k as f64
        }
    }

    /// Values along one axis.
    pub fn axis(&self, var: usize) -> Vec<f64> {
        (0..self.shape[var]).map(|k| self.value(var, k)).collect()
    }

    /// Index of the grid value closest to `v` on `var`'s axis.
    pub fn nearest(&self, var: usize, v: f64) -> usize {
        if self.continuous[var] {
            (v.clamp(0.0, 1.0) * (self.count - 1) as f64).round() as usize
        } else {
            v as usize
        }
    }

    /// Total point count, saturating.
    pub fn n_points(&self) -> u128 {
        self.shape.iter().map(|&s| s as u128).product()
    }

    /// Writes the joint assignment for multi-index `z` into `vals`.
    pub fn fill(&self, z: &[usize], vals: &mut [f64]) {
        for (v, (&k, out)) in z.iter().zip(vals.iter_mut()).enumerate() {
            *out = self.value(v, k);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(grid_count(1.0).unwrap(), 2);
        assert_eq!(grid_count(0.5).unwrap(), 2);
        assert_eq!(grid_count(0.25).unwrap(), 3);
        assert_eq!(grid_count(0.125).unwrap(), 5);
        assert_eq!(grid_count(1.0 / 16.0).unwrap(), 9);
        assert_eq!(grid_count(0.1).unwrap(), 6);
        assert_eq!(grid_count(0.3).unwrap(), 3);
        assert!(grid_count(0.0).is_err());
        assert!(grid_count(1.5).is_err());
    }

    #[test]
    fn coarse_grids_nest_in_finer_ones() {
        for (coarse, fine) in [(0.5, 0.25), (0.25, 0.125), (0.125, 1.0 / 16.0), (1.0 / 16.0, 1.0 / 32.0)] {
            let (c, f) = (grid_count(coarse).unwrap(), grid_count(fine).unwrap());
            assert_eq!((f - 1) % (c - 1), 0);
        }
    }
}
