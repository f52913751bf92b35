//! Irrigation-network benchmarks: channels hold water levels in `[0,1]`,
//! binary regulation devices pump between adjacent channels.
//!
//! Channel `i` with net device flow `f ∈ [−1, 1]` moves to
//! `Beta(τ·m, τ·(1−m))` with `m = clip(x_i + flow_scale·f, margin, 1−margin)`.
//! Output channels earn their level linearly; every other channel earns a
//! Gaussian bump around a target level.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::basis::{BasisFunction, BasisSet};
use crate::model::{BetaCpf, ContinuousExpr, Cpf, ModelDoc, ScopedFunction, VariableSpec, DEFAULT_FLOOR};
use crate::{Error, Result};

/// Channels and directed device links `from → to`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub channels: usize,
    pub links: Vec<(usize, usize)>,
    /// Channels fed by an uncontrolled input.
    pub inputs: Vec<usize>,
    /// Channels drained by an uncontrolled output; their reward is linear.
    pub outputs: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Topology {
    /// `n` channels in a cycle, device `i` pumping `i → i+1`.
    Ring { n: usize },
    /// `n` three-channel rings whose first channels form an outer ring.
    RingOfRings { n: usize },
    Custom { network: Network },
}

impl Topology {
    pub fn network(&self) -> Result<Network> {
        let net = match *self {
            Topology::Ring { n } => {
                if n < 3 {
                    return Err(Error::Misuse(format!("a ring needs at least 3 channels, got {n}")));
                }
                Network {
                    channels: n,
                    links: (0..n).map(|i| (i, (i + 1) % n)).collect(),
                    inputs: vec![0],
                    outputs: vec![n / 2],
                }
            }
            Topology::RingOfRings { n } => {
                if n < 3 {
                    return Err(Error::Misuse(format!("a ring of rings needs at least 3 rings, got {n}")));
                }
                let mut links = vec![];
                for k in 0..n {
                    let b = 3 * k;
                    links.extend([(b, b + 1), (b + 1, b + 2), (b + 2, b)]);
                    links.push((b, 3 * ((k + 1) % n)));
                }
                Network {
                    channels: 3 * n,
                    links,
                    inputs: vec![0],
                    outputs: vec![3 * (n / 2) + 1],
                }
            }
            Topology::Custom { ref network } => network.clone(),
        };
        net.check()?;
        Ok(net)
    }
}

impl Network {
    fn check(&self) -> Result<()> {
        let c = self.channels;
        if c == 0 {
            return Err(Error::Misuse("network has no channels".into()));
        }
        let mut seen = BTreeSet::new();
        for &(f, t) in &self.links {
            if f >= c || t >= c || f == t {
                return Err(Error::Misuse(format!("bad link {f} -> {t}")));
            }
            if !seen.insert((f, t)) {
                return Err(Error::Misuse(format!("duplicate link {f} -> {t}")));
            }
        }
        if self.inputs.iter().chain(&self.outputs).any(|&k| k >= c) {
            return Err(Error::Misuse("input or output channel out of range".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchmarkSpec {
    pub topology: Topology,
    /// Beta concentration `h1 + h2`.
    pub tau: f64,
    pub margin: f64,
    /// Level change per unit of net flow.
    pub flow_scale: f64,
    /// Net flow contributed by an uncontrolled input (and removed by an output).
    pub external_flow: f64,
    pub output_slope: f64,
    pub target_mean: f64,
    pub target_variance: f64,
    pub target_weight: f64,
    /// Half-width of uniform noise added to each interior target mean.
    pub jitter: f64,
    /// Knots shared by the piecewise-linear features.
    pub knots: Vec<f64>,
    pub discount: f64,
    pub seed: u64,
}

impl Default for BenchmarkSpec {
    fn default() -> Self {
        Self {
            topology: Topology::Ring { n: 6 },
            tau: 20.0,
            margin: 0.05,
            flow_scale: 0.5,
            external_flow: 0.2,
            output_slope: 1.0,
            target_mean: 0.5,
            target_variance: 0.01,
            target_weight: 1.0,
            jitter: 0.0,
            knots: vec![0.0, 0.5, 1.0],
            discount: 0.95,
            seed: 0,
        }
    }
}

impl BenchmarkSpec {
    pub fn ring(n: usize) -> Self {
        Self {
            topology: Topology::Ring { n },
            ..Self::default()
        }
    }

    pub fn ring_of_rings(n: usize) -> Self {
        Self {
            topology: Topology::RingOfRings { n },
            ..Self::default()
        }
    }
}

fn channel(i: usize) -> String {
    format!("x{i}")
}

fn device(k: usize) -> String {
    format!("a{k}")
}

/// `τ·clip(x + shift, margin, 1 − margin)` as a piecewise-linear function of `x`.
fn clipped_level(var: &str, shift: f64, tau: f64, margin: f64) -> ContinuousExpr {
    let level = |x: f64| tau * (x + shift).clamp(margin, 1.0 - margin);
    let mut knots = vec![0.0];
    for k in [margin - shift, 1.0 - margin - shift] {
        if k > 1e-9 && k < 1.0 - 1e-9 && k > *knots.last().unwrap() + 1e-9 {
            knots.push(k);
        }
    }
    knots.push(1.0);
    let values = knots.iter().map(|&x| level(x)).collect();
    ContinuousExpr::piecewise(var, knots, values)
}

/// Model and basis set for `spec`.
pub fn generate(spec: &BenchmarkSpec) -> Result<(ModelDoc, BasisSet)> {
    let net = spec.topology.network()?;
    if !(spec.tau > 0.0 && spec.margin > 0.0 && spec.margin < 0.5) {
        return Err(Error::Misuse("need tau > 0 and margin in (0, 0.5)".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let state_vars = (0..net.channels).map(|i| VariableSpec::continuous(channel(i))).collect();
    let action_vars = (0..net.links.len()).map(|k| VariableSpec::discrete(device(k), 2)).collect();

    let mut cpfs = vec![];
    for i in 0..net.channels {
        // Devices touching channel i, in device order, with their sign.
        let touching: Vec<(usize, f64)> = net
            .links
            .iter()
            .enumerate()
            .filter_map(|(k, &(f, t))| match (f == i, t == i) {
                (true, _) => Some((k, -1.0)),
                (_, true) => Some((k, 1.0)),
                _ => None,
            })
            .collect();
        let external = spec.external_flow
            * (net.inputs.iter().filter(|&&k| k == i).count() as f64
                - net.outputs.iter().filter(|&&k| k == i).count() as f64);
        let rows = 1usize << touching.len();
        let mut h1 = vec![];
        let mut h2 = vec![];
        for row in 0..rows {
            let mut flow = external;
            for (pos, &(_, sign)) in touching.iter().enumerate() {
                // Row-major, last scope variable fastest.
                if (row >> (touching.len() - 1 - pos)) & 1 == 1 {
                    flow += sign;
                }
            }
            let shift = spec.flow_scale * flow.clamp(-1.0, 1.0);
            h1.push(clipped_level(&channel(i), shift, spec.tau, spec.margin));
            h2.push(match clipped_level(&channel(i), shift, spec.tau, spec.margin) {
                ContinuousExpr::PiecewiseLinear { mut pieces } => {
                    for v in &mut pieces[0].values {
                        *v = spec.tau - *v;
                    }
                    ContinuousExpr::PiecewiseLinear { pieces }
                }
                _ => unreachable!(),
            });
        }
        let scope: Vec<String> = touching.iter().map(|&(k, _)| device(k)).collect();
        let scope: Vec<&str> = scope.iter().map(String::as_str).collect();
        let name = channel(i);
        cpfs.push(Cpf::Beta(BetaCpf {
            child: name.clone(),
            h1: ScopedFunction::tabular(&scope, &[&name], h1),
            h2: ScopedFunction::tabular(&scope, &[&name], h2),
            floor: DEFAULT_FLOOR,
        }));
    }

    let rewards = (0..net.channels)
        .map(|i| {
            let name = channel(i);
            let expr = if net.outputs.contains(&i) {
                ContinuousExpr::linear(&name, 0.0, spec.output_slope)
            } else {
                let noise = if spec.jitter > 0.0 {
                    rng.random_range(-spec.jitter..=spec.jitter)
                } else {
                    0.0
                };
                ContinuousExpr::gaussian(&name, spec.target_weight, spec.target_mean + noise, spec.target_variance)
            };
            ScopedFunction::continuous(&[&name], expr)
        })
        .collect();

    let model = ModelDoc {
        state_vars,
        action_vars,
        cpfs,
        rewards,
        discount: spec.discount,
    };

    let mut basis = vec![BasisFunction::constant()];
    let k = &spec.knots;
    let nk = k.len();
    let unit = |j: usize| -> Vec<f64> { (0..nk).map(|t| if t == j { 1.0 } else { 0.0 }).collect() };
    for i in 0..net.channels {
        let name = channel(i);
        basis.push(BasisFunction::monomial(&[(&name, 1)]));
        basis.push(BasisFunction::piecewise(&name, k.clone(), unit(0)));
        basis.push(BasisFunction::piecewise(&name, k.clone(), unit(nk / 2)));
        basis.push(BasisFunction::piecewise(&name, k.clone(), unit(nk - 1)));
    }
    Ok((model, BasisSet { basis }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_model, HybridModel};

    #[test]
    fn ring_shape() {
        let (doc, basis) = generate(&BenchmarkSpec::ring(6)).unwrap();
        assert!(validate_model(&doc).is_empty());
        assert_eq!(doc.state_vars.len(), 6);
        assert_eq!(doc.action_vars.len(), 6);
        assert_eq!(basis.basis.len(), 25);
        let m = HybridModel::new(doc).unwrap();
        // x0 depends on itself and the two devices touching it.
        assert_eq!(m.parents(0), &[0, 6, 11]);
        m.check_state(&[0.5; 6]).unwrap();
        basis.compile(&m).unwrap();
    }

    #[test]
    fn clipped_level_matches_formula() {
        for shift in [-0.5, -0.3, 0.0, 0.2, 0.5] {
            let e = clipped_level("x", shift, 20.0, 0.05);
            let ContinuousExpr::PiecewiseLinear { pieces } = e else { panic!() };
            let p = crate::model::Pwl::new(pieces[0].knots.clone(), pieces[0].values.clone());
            for t in 0..=50 {
                let x = t as f64 / 50.0;
                assert!((p.eval(x) - 20.0 * (x + shift).clamp(0.05, 0.95)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn small_rings_rejected() {
        assert!(generate(&BenchmarkSpec::ring(2)).is_err());
        assert!(generate(&BenchmarkSpec::ring_of_rings(1)).is_err());
    }
}
