use halp::lp::{
    exhaustive_search, solve_lp, solve_with_generation, ConstraintOracle, GenerationOptions, LinearProgram, LpStatus,
    SearchMode,
};
use halp_testkit::lp::vertex_enumeration;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_lp(rng: &mut ChaCha8Rng, n: usize, m: usize) -> LinearProgram {
    let c: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut lp = LinearProgram::new(c).with_box(-5.0, 5.0);
    for _ in 0..m {
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        lp.add_constraint(a, rng.random_range(-2.0..1.0));
    }
    lp
}

#[test]
fn five_variable_lps_match_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..30 {
        let lp = random_lp(&mut rng, 5, 6);
        let s = solve_lp(&lp).unwrap();
        let oracle = vertex_enumeration(&lp.objective, &lp.constraints, &lp.lower, &lp.upper);
        match oracle {
            Some((obj, _)) => {
                assert_eq!(s.status, LpStatus::Optimal);
                assert!((s.objective - obj).abs() < 1e-6, "{} vs {obj}", s.objective);
                for (a, b) in &lp.constraints {
                    assert!(a.iter().zip(&s.w).map(|(x, y)| x * y).sum::<f64>() >= b - 1e-8);
                }
            }
            None => assert_eq!(s.status, LpStatus::Infeasible),
        }
    }
}

#[test]
fn degenerate_rows_terminate() {
    // Many constraints through the same vertex.
    let mut lp = LinearProgram::new(vec![1.0, 1.0, 1.0]).with_box(-10.0, 10.0);
    for k in 0..40 {
        let t = k as f64 / 40.0;
        lp.add_constraint(vec![1.0, t, 1.0 - t], 0.0);
        lp.add_constraint(vec![t, 1.0, 1.0 - t], 0.0);
        lp.add_constraint(vec![1.0 - t, t, 1.0], 0.0);
    }
    let s = solve_lp(&lp).unwrap();
    let (obj, _) = vertex_enumeration(&lp.objective, &lp.constraints, &lp.lower, &lp.upper).unwrap();
    assert!((s.objective - obj).abs() < 1e-9);
}

struct Dense {
    shape: Vec<usize>,
    rows: Vec<(Vec<f64>, f64)>,
}

impl ConstraintOracle for Dense {
    fn dim(&self) -> usize {
        self.rows[0].0.len()
    }
    fn shape(&self) -> &[usize] {
        &self.shape
    }
    fn row(&self, z: &[usize]) -> (Vec<f64>, f64) {
        let flat = z.iter().zip(&self.shape).fold(0, |acc, (&v, &s)| acc * s + v);
        self.rows[flat].clone()
    }
}

fn random_oracle(rng: &mut ChaCha8Rng, shape: Vec<usize>, n: usize) -> Dense {
    let total: usize = shape.iter().product();
    let rows = (0..total)
        .map(|_| {
            let mut a: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            a[0] = 1.0 + rng.random_range(0.0..0.5);
            (a, rng.random_range(-1.0..1.0))
        })
        .collect();
    Dense { shape, rows }
}

#[test]
fn greedy_with_verification_matches_exhaustive() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5 {
        let o = random_oracle(&mut rng, vec![4, 3, 5, 2], 4);
        let c = vec![1.0, 0.1, -0.2, 0.05];
        let ex = solve_with_generation(&c, &o, &GenerationOptions::new(SearchMode::Exhaustive, 50.0, 4)).unwrap();
        let gr = solve_with_generation(
            &c,
            &o,
            &GenerationOptions::new(SearchMode::Greedy { restarts: 5, verify: true }, 50.0, 4),
        )
        .unwrap();
        assert!(ex.max_violation <= 1e-6 && gr.max_violation <= 1e-6);
        assert!(gr.certified);
        assert!(gr.objective <= ex.objective + 1e-6);
        assert!((gr.objective - ex.objective).abs() < 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generation_matches_full_lp(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let o = random_oracle(&mut rng, vec![3, 3], 3);
        let c = vec![1.0, 0.3, -0.4];
        let gen = solve_with_generation(&c, &o, &GenerationOptions::new(SearchMode::Exhaustive, 20.0, 3)).unwrap();
        let mut lp = LinearProgram::new(c.clone()).with_box(-20.0, 20.0);
        for (a, b) in &o.rows {
            lp.add_constraint(a.clone(), *b);
        }
        let full = solve_lp(&lp).unwrap();
        prop_assert_eq!(full.status, LpStatus::Optimal);
        prop_assert!((gen.objective - full.objective).abs() < 1e-6);
        for pair in gen.objective_trace.windows(2) {
            prop_assert!(pair[1] >= pair[0] - 1e-9);
        }
        let field = o.slack_field(&gen.weights);
        let (_, slack) = exhaustive_search(field.as_ref(), &o.shape).unwrap();
        prop_assert!(slack >= -1e-6);
    }

    #[test]
    fn satisfied_constraint_leaves_optimum(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut lp = random_lp(&mut rng, 4, 5);
        let s = solve_lp(&lp).unwrap();
        prop_assume!(s.status == LpStatus::Optimal);
        let a: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let at: f64 = a.iter().zip(&s.w).map(|(x, y)| x * y).sum();
        lp.add_constraint(a, at - 0.5);
        let s2 = solve_lp(&lp).unwrap();
        prop_assert!((s2.objective - s.objective).abs() <= 1e-9);
    }
}
