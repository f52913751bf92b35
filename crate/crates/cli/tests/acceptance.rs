//! Acceptance suite: one PASS/FAIL line per criterion.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use halp::basis::{
    backproject_monomial, relevance_weight, BasisFunction, BasisSet, ContinuousFactor, DiscreteFactor, Marginal,
    StateRelevanceDensity,
};
use halp::halp::{build_halp, solve_halp, SolveOptions};
use halp::lp::ConstraintOracle;
use halp::model::{
    BetaCpf, ContinuousExpr, Cpf, DiscriminantCpf, HybridModel, ModelDoc, PiecewiseLinear, Point, ScopedFunction,
    VariableSpec, DEFAULT_FLOOR,
};
use halp::policy::DiscretizedMdp;
use halp_testkit::lp::{solve_dense, vertex_enumeration};
use halp_testkit::quad::{beta_ln_pdf, integrate};
use halp_testkit::stats::pooled_se;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::Value;

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(limit: Duration, start: Instant, outcome: Outcome) -> Outcome {
    let took = start.elapsed();
    let stamp = |d: String| format!("{d} ({:.1} s, limit {} s)", took.as_secs_f64(), limit.as_secs());
    match outcome {
        Ok(d) if took <= limit => Ok(stamp(d)),
        Ok(d) => Err(stamp(format!("too slow: {d}"))),
        Err(d) => Err(stamp(d)),
    }
}

fn beta_model(h1: ScopedFunction, h2: ScopedFunction) -> HybridModel {
    HybridModel::new(ModelDoc {
        state_vars: vec![VariableSpec::continuous("x")],
        action_vars: vec![],
        cpfs: vec![Cpf::Beta(BetaCpf {
            child: "x".into(),
            h1,
            h2,
            floor: DEFAULT_FLOOR,
        })],
        rewards: vec![],
        discount: 0.9,
    })
    .unwrap()
}

fn beta_expectation(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    integrate(0.0, 1.0, 1e-13, |x, y| f(x) * beta_ln_pdf(a, b, x, y).exp())
}

/// Closed-form monomial backprojections against adaptive quadrature.
fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (o1, s1) = (rng.random_range(0.3..10.0), rng.random_range(0.0..20.0));
        let (o2, s2) = (rng.random_range(0.3..10.0), rng.random_range(0.0..20.0));
        let m = beta_model(
            ScopedFunction::continuous(&["x"], ContinuousExpr::linear("x", o1, s1)),
            ScopedFunction::continuous(&["x"], ContinuousExpr::linear("x", o2, s2)),
        );
        let degree = rng.random_range(0..=4u32);
        let x: f64 = rng.random();
        let g = backproject_monomial(&m, &BTreeMap::from([("x".to_string(), degree)])).unwrap();
        let closed = g.eval(&Point::new(&[x], &[]));
        let (a, b) = (o1 + s1 * x, o2 + s2 * x);
        let quad = beta_expectation(a, b, |t| t.powi(degree as i32));
        worst = worst.max((closed - quad).abs());
    }
    check(worst < 1e-6, format!("max |closed form - quadrature| = {worst:.2e} over 100 cases"))
}

fn relevance_model() -> HybridModel {
    HybridModel::new(ModelDoc {
        state_vars: vec![
            VariableSpec::continuous("x"),
            VariableSpec::continuous("y"),
            VariableSpec::discrete("d", 3),
        ],
        action_vars: vec![],
        cpfs: vec![
            Cpf::Beta(BetaCpf {
                child: "x".into(),
                h1: ScopedFunction::constant(2.0),
                h2: ScopedFunction::constant(2.0),
                floor: DEFAULT_FLOOR,
            }),
            Cpf::Beta(BetaCpf {
                child: "y".into(),
                h1: ScopedFunction::constant(1.0),
                h2: ScopedFunction::constant(3.0),
                floor: DEFAULT_FLOOR,
            }),
            Cpf::Discriminant(DiscriminantCpf {
                child: "d".into(),
                discriminants: (0..3).map(|k| ScopedFunction::constant(1.0 + k as f64)).collect(),
                floor: DEFAULT_FLOOR,
            }),
        ],
        rewards: vec![],
        discount: 0.9,
    })
    .unwrap()
}

fn random_function(rng: &mut ChaCha8Rng) -> BasisFunction {
    let discrete_factor = if rng.random_bool(0.5) {
        DiscreteFactor {
            scope: vec!["d".into()],
            table: (0..3).map(|_| rng.random_range(-1.0..2.0)).collect(),
        }
    } else {
        DiscreteFactor::default()
    };
    let continuous_factor = if rng.random_bool(0.5) {
        let degrees = BTreeMap::from([
            ("x".to_string(), rng.random_range(0..=4)),
            ("y".to_string(), rng.random_range(0..=4)),
        ]);
        ContinuousFactor::Monomial { degrees }
    } else {
        let mid = rng.random_range(0.1..0.9);
        ContinuousFactor::PiecewiseLinear {
            pieces: vec![PiecewiseLinear {
                var: if rng.random_bool(0.5) { "x" } else { "y" }.into(),
                knots: vec![0.0, mid, 1.0],
                values: (0..3).map(|_| rng.random_range(-1.0..1.0)).collect(),
            }],
        }
    };
    BasisFunction {
        discrete_factor,
        continuous_factor,
    }
}

fn random_marginal(rng: &mut ChaCha8Rng) -> Marginal {
    if rng.random_bool(0.25) {
        Marginal::Uniform
    } else {
        Marginal::Beta {
            a: rng.random_range(0.5..6.0),
            b: rng.random_range(0.5..6.0),
        }
    }
}

/// Factored relevance weights against Monte Carlo over ψ.
fn criterion_2() -> Outcome {
    let m = relevance_model();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let cases: Vec<(BasisFunction, StateRelevanceDensity)> = (0..50)
        .map(|_| {
            let f = random_function(&mut rng);
            let mut probs: Vec<f64> = (0..3).map(|_| rng.random_range(0.1..1.0)).collect();
            let total: f64 = probs.iter().sum();
            probs.iter_mut().for_each(|p| *p /= total);
            let overrides = BTreeMap::from([
                ("x".to_string(), random_marginal(&mut rng)),
                ("y".to_string(), random_marginal(&mut rng)),
                ("d".to_string(), Marginal::Categorical { probs }),
            ]);
            (f, StateRelevanceDensity::with_overrides(&m, &overrides).unwrap())
        })
        .collect();
    let z: Vec<f64> = cases
        .par_iter()
        .enumerate()
        .map(|(k, (f, psi))| {
            let basis = BasisSet { basis: vec![f.clone()] }.compile(&m).unwrap().remove(0);
            let alpha = relevance_weight(psi, &basis).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(2000 + k as u64);
            let n = 1_000_000;
            let (mut s, mut ss) = (0.0, 0.0);
            for _ in 0..n {
                let v = basis.eval(&psi.sample(&mut rng).unwrap());
                s += v;
                ss += v * v;
            }
            let mean = s / n as f64;
            let se = ((ss / n as f64 - mean * mean).max(0.0) / (n - 1) as f64).sqrt();
            if se == 0.0 {
                if (alpha - mean).abs() < 1e-12 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                (alpha - mean).abs() / se
            }
        })
        .collect();
    let worst = z.iter().copied().fold(0.0, f64::max);
    let over = z.iter().filter(|&&v| v > 3.0).count();
    check(
        over == 0,
        format!("max |factored - Monte Carlo| = {worst:.2} standard errors over 50 cases, {over} beyond 3"),
    )
}

/// Constraint generation against the fully enumerated ε-grid LP.
fn criterion_3() -> Outcome {
    let gamma = 0.9;
    let lin = ContinuousExpr::linear;
    let m = HybridModel::new(ModelDoc {
        state_vars: vec![VariableSpec::continuous("x"), VariableSpec::continuous("y")],
        action_vars: vec![VariableSpec::discrete("a", 2)],
        cpfs: vec![
            Cpf::Beta(BetaCpf {
                child: "x".into(),
                h1: ScopedFunction::tabular(&["a"], &["x"], vec![lin("x", 1.0, 3.0), lin("x", 4.0, 1.0)]),
                h2: ScopedFunction::continuous(&["y"], lin("y", 2.0, 2.0)),
                floor: DEFAULT_FLOOR,
            }),
            Cpf::Beta(BetaCpf {
                child: "y".into(),
                h1: ScopedFunction::continuous(&["y"], lin("y", 1.5, 2.0)),
                h2: ScopedFunction::constant(2.5),
                floor: DEFAULT_FLOOR,
            }),
        ],
        rewards: vec![
            ScopedFunction::continuous(&["x"], ContinuousExpr::gaussian("x", 1.0, 0.6, 0.02)),
            ScopedFunction::tabular(&["a"], &["y"], vec![lin("y", 0.0, 1.0), lin("y", -0.2, 0.5)]),
        ],
        discount: gamma,
    })
    .unwrap();
    let basis = BasisSet {
        basis: vec![
            BasisFunction::constant(),
            BasisFunction::monomial(&[("x", 1)]),
            BasisFunction::monomial(&[("y", 2)]),
            BasisFunction::monomial(&[("x", 1), ("y", 1)]),
        ],
    };
    let bases = basis.compile(&m).unwrap();
    let psi = StateRelevanceDensity::uniform(&m);
    let program = build_halp(&m, &bases, &psi, 0.25).unwrap();
    let sol = solve_halp(&program, &SolveOptions::default()).unwrap();

    // Every grid row from scratch: moments of x' and y' by quadrature.
    let pows = [(0, 0), (1, 0), (0, 2), (1, 1)];
    let grid = [0.0, 0.5, 1.0];
    let mut rows = vec![];
    for &x in &grid {
        for &y in &grid {
            for a in 0..2 {
                let (ax, bx) = if a == 0 { (1.0 + 3.0 * x, 2.0 + 2.0 * y) } else { (4.0 + x, 2.0 + 2.0 * y) };
                let (ay, by) = (1.5 + 2.0 * y, 2.5);
                let mx = |k: i32| beta_expectation(ax, bx, |t| t.powi(k));
                let my = |k: i32| beta_expectation(ay, by, |t| t.powi(k));
                let row: Vec<f64> = pows
                    .iter()
                    .map(|&(px, py)| x.powi(px) * y.powi(py) - gamma * mx(px) * my(py))
                    .collect();
                let gauss = (-(x - 0.6f64).powi(2) / (2.0 * 0.02)).exp() / (2.0 * std::f64::consts::PI * 0.02).sqrt();
                let r = gauss + if a == 0 { y } else { -0.2 + 0.5 * y };
                rows.push((row, r));
            }
        }
    }
    let alpha = [1.0, 0.5, 1.0 / 3.0, 0.25];
    let bound = program.weight_bound();
    let Some((dense, _)) = vertex_enumeration(&alpha, &rows, &[-bound; 4], &[bound; 4]) else {
        return Err("enumerated LP is infeasible".into());
    };
    let gap = (sol.objective - dense).abs();
    check(
        gap < 1e-6 && program.n_points() == 18,
        format!(
            "generation {:.9} vs enumerated {dense:.9} (|diff| {gap:.1e}, {} of 18 rows added)",
            sol.objective, sol.diagnostics.constraints_added
        ),
    )
}

/// Upper bound on the grid MDP's optimal values.
fn criterion_4() -> Outcome {
    let gamma = 0.9;
    let lin = ContinuousExpr::linear;
    let m = HybridModel::new(ModelDoc {
        state_vars: vec![VariableSpec::continuous("x")],
        action_vars: vec![VariableSpec::discrete("a", 2)],
        cpfs: vec![Cpf::Beta(BetaCpf {
            child: "x".into(),
            h1: ScopedFunction::tabular(&["a"], &["x"], vec![lin("x", 1.0, 4.0), lin("x", 3.0, 2.0)]),
            h2: ScopedFunction::tabular(&["a"], &["x"], vec![lin("x", 5.0, -4.0), lin("x", 2.0, 0.0)]),
            floor: DEFAULT_FLOOR,
        })],
        rewards: vec![ScopedFunction::continuous(
            &["x"],
            ContinuousExpr::gaussian("x", 1.0, 0.6, 0.02),
        )],
        discount: gamma,
    })
    .unwrap();
    let basis = BasisSet {
        basis: (0..=6)
            .map(|d| match d {
                0 => BasisFunction::constant(),
                d => BasisFunction::monomial(&[("x", d)]),
            })
            .collect(),
    };
    let bases = basis.compile(&m).unwrap();
    let program = build_halp(&m, &bases, &StateRelevanceDensity::uniform(&m), 1.0 / 40.0).unwrap();
    if program.grid().count != 21 {
        return Err(format!("grid has {} points, expected 21", program.grid().count));
    }
    let sol = solve_halp(&program, &SolveOptions::default()).unwrap();
    let mdp = DiscretizedMdp::new(&m, 21, 1.0).unwrap();
    let vi = mdp.value_iteration(1e-10, 1_000_000).unwrap();
    let hw: Vec<f64> = (0..mdp.n_states())
        .map(|s| {
            let x = mdp.state(s);
            bases.iter().zip(&sol.weights).map(|(b, w)| w * b.eval(&x)).sum()
        })
        .collect();
    let delta = mdp.bellman_gap(&hw).max(0.0);
    let slack = (0..mdp.n_states())
        .map(|s| hw[s] - (vi.values[s] - delta / (1.0 - gamma)))
        .fold(f64::INFINITY, f64::min);
    check(
        vi.residual <= 1e-8 && slack >= -1e-9,
        format!(
            "min_x Hw - (V* - δ/(1-γ)) = {slack:.3e} with δ = {delta:.3e} on the 21-state MDP \
             (ε-HALP δ {:.1e}, VI residual {:.1e})",
            sol.measured_delta, vi.residual
        ),
    )
}

fn halp_cli(args: &[&str]) -> (bool, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_halp")).args(args).output().expect("run halp");
    (
        out.status.success(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn halp_json(args: &[&str]) -> Result<Value, String> {
    let (ok, out, err) = halp_cli(args);
    if !ok {
        return Err(format!("halp {} failed: {err}", args.join(" ")));
    }
    serde_json::from_str(&out).map_err(|e| format!("bad JSON from halp {}: {e}", args.join(" ")))
}

fn ring6(dir: &Path) -> Result<(String, String), String> {
    let d = dir.to_str().unwrap();
    halp_json(&["generate", "--topology", "ring", "--n", "6", "--out-dir", d, "--format", "json"])?;
    let model = dir.join("model.json").to_str().unwrap().to_string();
    let basis = dir.join("basis.json").to_str().unwrap().to_string();
    halp_json(&[
        "solve", "--model", &model, "--basis", &basis, "--eps", "0.5", "--eps", "0.25", "--eps", "0.125", "--out-dir",
        d, "--format", "json",
    ])?;
    Ok((model, basis))
}

/// δ on ring(6) never grows as the grid refines.
fn criterion_5() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let (model, basis) = ring6(dir.path())?;
    let mut deltas = vec![];
    for eps in ["0.5", "0.25", "0.125"] {
        let sol = dir.path().join(format!("solution_{eps}.json"));
        let v = halp_json(&[
            "infeasibility", "--model", &model, "--basis", &basis, "--solution", sol.to_str().unwrap(),
            "--probe-eps", "0.0625", "--format", "json",
        ])?;
        deltas.push(v["delta"].as_f64().ok_or("no delta")?);
    }
    check(
        deltas.windows(2).all(|w| w[1] <= w[0]),
        format!(
            "δ on the shared eps=1/16 probe: {:.3e} (1/2), {:.3e} (1/4), {:.3e} (1/8)",
            deltas[0], deltas[1], deltas[2]
        ),
    )
}

/// Policy quality trends on ring(6).
fn criterion_6() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let (model, basis) = ring6(dir.path())?;
    let sols: Vec<String> = ["0.5", "0.25", "0.125"]
        .iter()
        .map(|e| dir.path().join(format!("solution_{e}.json")).to_str().unwrap().to_string())
        .collect();
    let v = halp_json(&[
        "evaluate", "--model", &model, "--basis", &basis, "--solution", &sols[0], "--solution", &sols[1],
        "--solution", &sols[2], "--baselines", "random,local", "--trajectories", "100", "--horizon", "100", "--format",
        "json",
    ])?;
    let rows = v["rows"].as_array().ok_or("no rows")?;
    let stat = |k: usize| (rows[k]["mean"].as_f64().unwrap(), rows[k]["std_dev"].as_f64().unwrap());
    let [h2, h4, h8, random, local] = [0, 1, 2, 3, 4].map(stat);
    let se = |a: (f64, f64), b: (f64, f64)| pooled_se(a.1, 100, b.1, 100);
    let beats_random = [h4, h8].iter().all(|&h| h.0 - random.0 >= 2.0 * se(h, random));
    let monotone = h4.0 >= h2.0 - 2.0 * se(h4, h2) && h8.0 >= h4.0 - 2.0 * se(h8, h4);
    let vs_local = h8.0 >= local.0 - 2.0 * se(h8, local);
    check(
        beats_random && monotone && vs_local,
        format!(
            "mu: eps 1/2 {:.3}, 1/4 {:.3}, 1/8 {:.3}, random {:.3}, local {:.3}; \
             (a) {beats_random} (b) {monotone} (c) {vs_local}",
            h2.0, h4.0, h8.0, random.0, local.0
        ),
    )
}

/// Solve time on ring(n) grows polynomially.
fn criterion_7() -> Outcome {
    let v = halp_json(&[
        "scaleup", "--family", "ring", "--n", "4", "--n", "6", "--n", "8", "--n", "10", "--eps", "0.25", "--repeats",
        "5", "--record-timings", "--format", "json",
    ])?;
    let inst = v["instances"].as_array().ok_or("no instances")?;
    let n: Vec<f64> = inst.iter().map(|i| i["n"].as_f64().unwrap()).collect();
    let t: Vec<f64> = inst
        .iter()
        .map(|i| i["seconds"].as_f64().ok_or("unsolved instance"))
        .collect::<Result<_, _>>()?;
    // Least squares through the normal equations.
    let mut ata = vec![vec![0.0; 3]; 3];
    let mut atb = vec![0.0; 3];
    for (&x, &y) in n.iter().zip(&t) {
        let row = [1.0, x, x * x];
        for i in 0..3 {
            atb[i] += row[i] * y;
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    let c = solve_dense(ata, atb).ok_or("singular fit")?;
    let mean = t.iter().sum::<f64>() / t.len() as f64;
    let rss: f64 = n.iter().zip(&t).map(|(&x, &y)| (y - c[0] - c[1] * x - c[2] * x * x).powi(2)).sum();
    let tss: f64 = t.iter().map(|y| (y - mean).powi(2)).sum();
    let r2 = 1.0 - rss / tss;
    let ratios: Vec<f64> = t.windows(2).map(|w| w[1] / w[0]).collect();
    let reported = v["trends"][0]["fit"]["r_squared"].as_f64().unwrap_or(f64::NAN);
    check(
        r2 >= 0.9 && ratios.iter().all(|&r| r < 3.0) && (reported - r2).abs() < 1e-6,
        format!(
            "times {:?} ms, quadratic R^2 {r2:.4} (reported {reported:.4}), ratios {:?}",
            t.iter().map(|s| (s * 1e4).round() / 10.0).collect::<Vec<_>>(),
            ratios.iter().map(|r| (r * 100.0).round() / 100.0).collect::<Vec<_>>()
        ),
    )
}

/// Every command's JSON output, written twice with the same seed.
fn determinism_run(dir: &Path) -> Result<Vec<(String, String)>, String> {
    let d = dir.to_str().unwrap().to_string();
    let model = format!("{d}/model.json");
    let basis = format!("{d}/basis.json");
    let mut outputs = vec![];
    let mut run = |name: &str, args: Vec<String>| -> Result<(), String> {
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let (ok, out, err) = halp_cli(&refs);
        if !ok {
            return Err(format!("{name} failed: {err}"));
        }
        outputs.push((format!("{name} stdout"), out));
        Ok(())
    };
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    run("generate", s(&["generate", "--topology", "ring-of-rings", "--n", "3", "--seed", "7", "--out-dir", &d, "--format", "json"]))?;
    run(
        "solve",
        s(&["solve", "--model", &model, "--basis", &basis, "--eps", "0.5", "--eps", "0.25", "--out-dir", &d, "--format", "json"]),
    )?;
    let greedy_dir = format!("{d}/greedy");
    run(
        "solve greedy",
        s(&[
            "solve", "--model", &model, "--basis", &basis, "--eps", "0.25", "--search", "greedy", "--seed", "3", "--out-dir",
            &greedy_dir, "--format", "json",
        ]),
    )?;
    let sol = format!("{d}/solution_0.25.json");
    run(
        "evaluate",
        s(&[
            "evaluate", "--model", &model, "--basis", &basis, "--solution", &sol, "--baselines", "random,local,global:4",
            "--trajectories", "20", "--horizon", "20", "--seed", "5", "--out-dir", &d, "--format", "json",
        ]),
    )?;
    run(
        "infeasibility grid",
        s(&["infeasibility", "--model", &model, "--basis", &basis, "--solution", &sol, "--format", "json"]),
    )?;
    run(
        "infeasibility sample",
        s(&[
            "infeasibility", "--model", &model, "--basis", &basis, "--solution", &sol, "--samples", "5000", "--seed", "9",
            "--format", "json",
        ]),
    )?;
    run("scaleup", s(&["scaleup", "--n", "4", "--n", "5", "--n", "6", "--out-dir", &d, "--format", "json"]))?;
    let mut files: Vec<_> = walk(dir);
    files.sort();
    for f in files {
        let name = f.strip_prefix(dir).unwrap().display().to_string();
        outputs.push((name, std::fs::read_to_string(&f).unwrap()));
    }
    Ok(outputs)
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = vec![];
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else if p.extension().is_some_and(|x| x == "json") {
            out.push(p);
        }
    }
    out
}

fn criterion_8() -> Outcome {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = determinism_run(a.path())?;
    let second = determinism_run(b.path())?;
    let names: Vec<&str> = first.iter().map(|(n, _)| n.as_str()).collect();
    if first.len() != second.len() {
        return Err("runs produced different file sets".into());
    }
    let differing: Vec<&str> = first
        .iter()
        .zip(&second)
        .filter(|(x, y)| x != y)
        .map(|(x, _)| x.0.as_str())
        .collect();
    check(
        differing.is_empty(),
        format!("{} outputs compared ({}), differing: {:?}", names.len(), names.join(", "), differing),
    )
}

fn main() {
    let criteria: [(&str, u64, fn() -> Outcome); 8] = [
        ("closed-form backprojection", 10, criterion_1),
        ("relevance weights", 60, criterion_2),
        ("dense-LP equivalence", 5, criterion_3),
        ("upper-bound property", 30, criterion_4),
        ("delta monotonicity", 600, criterion_5),
        ("policy quality trend", 1200, criterion_6),
        ("scale-up trend", 1800, criterion_7),
        ("determinism", 600, criterion_8),
    ];
    let mut failed = 0;
    for (k, (name, limit, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match within(Duration::from_secs(*limit), start, outcome) {
            Ok(d) => println!("criterion {}: PASS  {name}: {d}", k + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {d}", k + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
