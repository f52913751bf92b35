use halp::basis::{BasisFunction, BasisSet, DiscreteFactor, StateRelevanceDensity};
use halp::halp::{build_halp, solve_halp, SolveOptions};
use halp::model::{
    BetaCpf, ContinuousExpr, Cpf, DiscriminantCpf, HybridModel, ModelDoc, ScopedFunction, VariableSpec,
    DEFAULT_FLOOR,
};
use halp::policy::{
    initial_states, q_value, rollout, ActionSearch, Controller, DiscretizedMdp, GreedyPolicy, HeuristicController,
    HeuristicKind, RolloutOptions,
};
use halp_testkit::stats::{mean, pooled_se, std_dev};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn q_value_matches_sampled_lookahead() {
    let m = HybridModel::new(ModelDoc {
        state_vars: vec![VariableSpec::continuous("x")],
        action_vars: vec![VariableSpec::discrete("a", 2)],
        cpfs: vec![Cpf::Beta(BetaCpf {
            child: "x".into(),
            h1: ScopedFunction::tabular(
                &["a"],
                &["x"],
                vec![ContinuousExpr::linear("x", 1.5, 3.0), ContinuousExpr::linear("x", 4.0, 1.0)],
            ),
            h2: ScopedFunction::constant(2.5),
            floor: DEFAULT_FLOOR,
        })],
        rewards: vec![ScopedFunction::continuous(&["x"], ContinuousExpr::gaussian("x", 1.0, 0.5, 0.05))],
        discount: 0.9,
    })
    .unwrap();
    let basis = BasisSet {
        basis: (0..4)
            .map(|d| match d {
                0 => BasisFunction::constant(),
                d => BasisFunction::monomial(&[("x", d)]),
            })
            .collect(),
    };
    let bases = basis.compile(&m).unwrap();
    let w = [1.0, -2.0, 3.5, 0.7];
    let hw = |x: f64| w.iter().enumerate().map(|(i, wi)| wi * x.powi(i as i32)).sum::<f64>();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for (x, a) in [(0.2, 0.0), (0.2, 1.0), (0.85, 1.0)] {
        let q = q_value(&m, &bases, &w, &[x], &[a]).unwrap();
        let samples: Vec<f64> = (0..100_000).map(|_| hw(m.sample_transition(&[x], &[a], &mut rng)[0])).collect();
        let r = m.eval_reward(&[x], &[a]).unwrap();
        let se = 0.9 * std_dev(&samples) / (samples.len() as f64).sqrt();
        let estimate = r + 0.9 * mean(&samples);
        assert!((q - estimate).abs() < 3.0 * se, "x={x} a={a}: {q} vs {estimate} (se {se})");
    }
}

/// Two binary state variables `s`, `t` and a binary action that steers `s`;
/// `t` tends to copy `s`. Reward is highest when both are on.
fn switch_model() -> HybridModel {
    let disc = |scope: [&str; 2], d: [[f64; 2]; 4]| {
        (0..2)
            .map(|k| ScopedFunction::tabular(&scope, &[], d.iter().map(|row| ContinuousExpr::constant(row[k])).collect()))
            .collect::<Vec<_>>()
    };
    HybridModel::new(ModelDoc {
        state_vars: vec![VariableSpec::discrete("s", 2), VariableSpec::discrete("t", 2)],
        action_vars: vec![VariableSpec::discrete("a", 2)],
        cpfs: vec![
            Cpf::Discriminant(DiscriminantCpf {
                child: "s".into(),
                discriminants: disc(["s", "a"], [[4.0, 1.0], [1.0, 3.0], [2.0, 2.0], [0.5, 5.0]]),
                floor: DEFAULT_FLOOR,
            }),
            Cpf::Discriminant(DiscriminantCpf {
                child: "t".into(),
                discriminants: disc(["s", "t"], [[6.0, 1.0], [3.0, 2.0], [1.0, 2.0], [1.0, 7.0]]),
                floor: DEFAULT_FLOOR,
            }),
        ],
        rewards: vec![ScopedFunction::tabular(
            &["s", "t"],
            &[],
            [0.0, 1.0, 0.5, 2.0].iter().map(|&r| ContinuousExpr::constant(r)).collect(),
        )],
        discount: 0.9,
    })
    .unwrap()
}

struct TablePolicy<'a> {
    mdp: &'a DiscretizedMdp<'a>,
    actions: Vec<usize>,
}

impl Controller for TablePolicy<'_> {
    fn name(&self) -> String {
        "optimal".into()
    }

    fn act(&self, x: &[f64], _rng: &mut ChaCha8Rng) -> Vec<f64> {
        let s = 2 * x[0] as usize + x[1] as usize;
        self.mdp.actions().decode(self.actions[s])
    }
}

#[test]
fn halp_policy_sits_between_random_and_optimal() {
    let m = switch_model();
    let basis = BasisSet {
        basis: vec![
            BasisFunction::constant(),
            BasisFunction::constant().with_discrete(DiscreteFactor::indicator("s", 2, 1)),
            BasisFunction::constant().with_discrete(DiscreteFactor::indicator("t", 2, 1)),
        ],
    };
    let bases = basis.compile(&m).unwrap();
    let program = build_halp(&m, &bases, &StateRelevanceDensity::uniform(&m), 1.0).unwrap();
    let sol = solve_halp(&program, &SolveOptions::default()).unwrap();
    let greedy = GreedyPolicy::new(&m, &bases, &sol.weights, 1.0, ActionSearch::Exhaustive).unwrap();

    let mdp = DiscretizedMdp::new(&m, 2, 1.0).unwrap();
    let vi = mdp.value_iteration(1e-10, 100_000).unwrap();
    let optimal = TablePolicy {
        mdp: &mdp,
        actions: vi.policy.clone(),
    };
    let random = HeuristicController::new(&m, HeuristicKind::Random, 1.0).unwrap();

    let opts = RolloutOptions::default();
    let init = initial_states(&m, opts.trajectories, opts.seed);
    let h = rollout(&m, &greedy, &opts, &init).unwrap();
    let r = rollout(&m, &random, &opts, &init).unwrap();
    let o = rollout(&m, &optimal, &opts, &init).unwrap();
    let n = opts.trajectories;
    assert!(h.mean >= r.mean - 2.0 * pooled_se(h.std_dev, n, r.std_dev, n));
    assert!(h.mean <= o.mean + 2.0 * pooled_se(h.std_dev, n, o.std_dev, n));
}

#[test]
fn reports_are_reproducible() {
    let m = switch_model();
    let random = HeuristicController::new(&m, HeuristicKind::Global { trials: 1 }, 1.0).unwrap();
    let opts = RolloutOptions {
        trajectories: 20,
        horizon: 30,
        seed: 4,
    };
    let init = initial_states(&m, 20, 4);
    let a = rollout(&m, &random, &opts, &init).unwrap();
    let b = rollout(&m, &random, &opts, &init).unwrap();
    assert_eq!(a, b);
}
