//! Acceptance suite: one `[PASS]`/`[FAIL]` line per criterion, nonzero exit on
//! any failure. Run with `cargo test -p plapreg --test acceptance`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use plapreg::experiments::{
    run_composition_check, run_theorem1_check, CompositionConfig, ScalingConfig, SharpnessOracle, SweepConfig,
    Theorem1Config,
};
use plapreg::plap_math::{
    alpha_s, beta_theta, integrand_lower_bound_check, l_eps, lagrangian_grad, lagrangian_hessian, monotonicity_gap,
    PLapParams,
};
use plapreg::smoothness::Region;
use plapreg::solver::solve;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Max-norm error bound for the 1D solve at 4097 nodes. Calibrated against the
/// exact solution: 1.83e-6 at 2049 nodes, 6.47e-7 at 4097 nodes.
const SOLVER_TOLERANCE: f64 = 2e-6;

/// `(id, name, check, runtime budget)`.
type Criterion = (&'static str, &'static str, fn() -> Outcome, Duration);

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: String) -> Outcome {
    Outcome { ok, detail }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Components with magnitudes spread over several decades.
fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let mag = 10f64.powf(rng.gen_range(-3.0..1.5));
            if rng.gen_bool(0.5) {
                mag
            } else {
                -mag
            }
        })
        .collect()
}

fn ac1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.gen_range(1..=3);
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let eps = rng.gen_range(1e-2..1.0);
        let p = rng.gen_range(2.0..6.0);
        let h = lagrangian_hessian(&w, eps, p).unwrap();
        let step = 1e-4 * l_eps(&w, eps);
        let mut fd = vec![0.0; n * n];
        for j in 0..n {
            let (mut wp, mut wm) = (w.clone(), w.clone());
            wp[j] += step;
            wm[j] -= step;
            let (gp, gm) = (lagrangian_grad(&wp, eps, p), lagrangian_grad(&wm, eps, p));
            for i in 0..n {
                fd[i * n + j] = (gp[i] - gm[i]) / (2.0 * step);
            }
        }
        worst = worst.max(dist(&h, &fd) / norm(&h));
    }
    outcome(
        worst < 1e-6,
        format!("max relative error {worst:.2e} < 1e-6 over 100 samples"),
    )
}

fn ac2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..10_000 {
        let n = rng.gen_range(1..=3);
        let w = random_vec(&mut rng, n);
        let v = random_vec(&mut rng, n);
        let eps = rng.gen_range(0.0..1.0);
        let p = rng.gen_range(2.0..6.0);
        let h = lagrangian_hessian(&w, eps, p).unwrap();
        let hv: Vec<f64> = (0..n).map(|i| (0..n).map(|j| h[i * n + j] * v[j]).sum()).collect();
        let r = hv.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() / norm(&v).powi(2);
        let lo = l_eps(&w, eps).powf(p - 2.0);
        let hi = (p - 1.0) * lo;
        // worst signed violation, scaled by the band
        worst = worst.max((lo - r) / lo.max(1.0)).max((r - hi) / hi.max(1.0));
    }
    outcome(
        worst <= 1e-10,
        format!("worst band violation {worst:.2e} <= 1e-10 over 10^4 pairs"),
    )
}

fn ac3() -> Outcome {
    let mut alg = 0.0f64;
    for i in 0..100 {
        for j in 0..100 {
            let p = 2.0 + 4.0 * i as f64 / 99.0;
            let q = 2.0 + j as f64 / 100.0;
            let lhs = 1.0 + (p - q) - (p - 2.0) * (q - 2.0);
            alg = alg.max((lhs - (p - 1.0) * (3.0 - q)).abs());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..100_000 {
        let n = rng.gen_range(1..=3);
        let w = random_vec(&mut rng, n);
        let mut h = vec![0.0; n * n];
        for a in 0..n {
            for b in a..n {
                let x = rng.gen_range(-5.0..5.0);
                h[a * n + b] = x;
                h[b * n + a] = x;
            }
        }
        let eps = rng.gen_range(1e-3..1.0);
        let p = rng.gen_range(2.0..6.0);
        let q = rng.gen_range(2.0..3.0);
        let (lhs, rhs) = integrand_lower_bound_check(&h, &w, eps, p, q).unwrap();
        let scale = l_eps(&w, eps).powf(p - q) * norm(&h).powi(2);
        worst = worst.max((rhs - lhs) / scale.max(f64::MIN_POSITIVE));
    }
    outcome(
        alg <= 1e-12 && worst <= 1e-10,
        format!("identity defect {alg:.1e} <= 1e-12 on 100x100 grid; smallest scaled integrand gap {:.2e} >= -1e-10 on 10^5 draws", -worst),
    )
}

fn ac4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut mono, mut hoelder, mut inverse) = (f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for _ in 0..100_000 {
        let n = rng.gen_range(1..=3);
        let w = random_vec(&mut rng, n);
        let v = random_vec(&mut rng, n);
        let s = rng.gen_range(1.0..4.0);
        let gap = monotonicity_gap(&w, &v, s);
        let scale = 0.5 * (norm(&w).powf(s - 1.0) + norm(&v).powf(s - 1.0)) * dist(&w, &v).powi(2);
        mono = mono.max(-gap / scale.max(f64::MIN_POSITIVE));

        let theta = rng.gen_range(0.05..1.0);
        let d = dist(&w, &v);
        let bound = 2.0 * d.powf(theta);
        hoelder = hoelder.max((dist(&beta_theta(&w, theta), &beta_theta(&v, theta)) - bound) / bound);

        let s = 1.0 / theta;
        let floor = 2f64.powf(-s) * d.powf(s);
        inverse = inverse.max((floor - dist(&alpha_s(&w, 0.0, s), &alpha_s(&v, 0.0, s))) / floor);
    }
    outcome(
        mono <= 1e-12 && hoelder <= 1e-12 && inverse <= 1e-12,
        format!(
            "largest relative excess (negative = slack): monotonicity {:.1e}, Hoelder {:.1e}, inverse {:.1e} (10^5 pairs each)",
            mono, hoelder, inverse
        ),
    )
}

fn ac5() -> Outcome {
    let o = SharpnessOracle::new(3.0, 1).unwrap();
    let error = |nodes: usize| {
        let grid = o.grid(nodes).unwrap();
        let res = solve(&o.problem(&grid, PLapParams::new(3.0, 1e-4)).unwrap()).unwrap();
        let (u, _, _) = o.fields(&grid).unwrap();
        (res.converged, res.u.max_abs_diff(&u))
    };
    let (c1, coarse) = error(2049);
    let (c2, fine) = error(4097);
    let ratio = coarse / fine;
    outcome(
        c1 && c2 && fine < SOLVER_TOLERANCE && ratio >= 2.0,
        format!("max error {fine:.2e} < {SOLVER_TOLERANCE:.0e} at 4097 nodes; refinement ratio {ratio:.2} >= 2"),
    )
}

fn ac6() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (p, q) in [(3.0, 2.5), (4.0, 3.0), (5.0, 4.0)] {
        let config = Theorem1Config {
            qs: vec![q, 1.0],
            thetas: vec![],
            region: Region::Fixed,
            ..Theorem1Config::for_p(p)
        };
        let rep = run_theorem1_check(&config).unwrap();
        let (table, sobolev) = (&rep.rows[0], &rep.rows[1]);
        let pred = 1.0 / (p - 1.0) + 1.0 / q;
        ok &= (table.theta_hat - pred).abs() <= 0.05 && sobolev.theta_hat >= 0.95;
        parts.push(format!(
            "p={p} q={q}: {:.3} vs {pred:.3}, q=1: {:.3}",
            table.theta_hat, sobolev.theta_hat
        ));
    }
    outcome(ok, parts.join("; "))
}

fn ac7() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for p in [3.0, 4.0] {
        for s in [p / 2.0, (p - 1.0) / 2.0 + 0.1] {
            let config = SweepConfig {
                eps_values: vec![1e-2, 1e-3, 1e-4],
                ..SweepConfig::new(p, s)
            };
            match config.run() {
                Ok(r) => {
                    ok &= r.verdicts.alpha_bounded;
                    parts.push(format!("p={p} s={s:.2}: ratio {:.4}", r.verdicts.alpha_ratio));
                }
                Err(e) => {
                    ok = false;
                    parts.push(format!("p={p} s={s:.2}: {e}"));
                }
            }
        }
    }
    outcome(ok, format!("{} (< 2)", parts.join("; ")))
}

fn ac8() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for p in [3.0, 4.0] {
        for lambda in [0.5, 2.0] {
            let r = ScalingConfig::new(p, lambda).run().unwrap();
            ok &= r.solution_ok && r.norm_ok;
            parts.push(format!(
                "p={p} lambda={lambda}: |u_l - l u| {:.1e} <= {:.1e}, norm rel err {:.1e}",
                r.solution_max_diff, r.solution_tolerance, r.norm_rel_err
            ));
        }
    }
    outcome(ok, parts.join("; "))
}

fn ac9() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for p in [3.0, 4.0, 5.0] {
        let lo = 2.0 / p;
        let config = CompositionConfig {
            thetas: vec![lo, 0.5 * (lo + 2.0 / (p - 1.0))],
            ..CompositionConfig::new(p)
        };
        let rep = run_composition_check(&config).unwrap();
        for row in &rep.rows {
            ok &= row.lhs <= row.rhs;
            parts.push(format!(
                "p={p} theta={:.3}: {:.3} <= {:.3}",
                row.theta, row.lhs, row.rhs
            ));
        }
    }
    outcome(ok, parts.join("; "))
}

fn ac10() -> Outcome {
    let p = 4.0;
    let q = 2.0 * (p - 1.0);
    let config = Theorem1Config {
        qs: vec![q],
        thetas: vec![],
        ..Theorem1Config::for_p(p)
    };
    let rep = run_theorem1_check(&config).unwrap();
    let bound = 1.0 / (p - 1.0) + 1.0 / q + 0.05;
    let hat = rep.rows[0].theta_hat;
    outcome(hat <= bound, format!("p=4 q=6: theta_hat {hat:.4} <= {bound:.4}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("AC1", "Hessian vs finite differences", ac1, Duration::from_secs(1)),
        ("AC2", "ellipticity sandwich", ac2, Duration::from_secs(1)),
        (
            "AC3",
            "coercivity algebra and integrand bound",
            ac3,
            Duration::from_secs(5),
        ),
        (
            "AC4",
            "monotonicity, Hoelder and inverse bounds",
            ac4,
            Duration::from_secs(5),
        ),
        (
            "AC5",
            "solver recovers the explicit solution",
            ac5,
            Duration::from_secs(30),
        ),
        (
            "AC6",
            "fractional exponents of the explicit solution",
            ac6,
            Duration::from_secs(120),
        ),
        (
            "AC7",
            "eps-uniform transformed W^{1,2} bound",
            ac7,
            Duration::from_secs(180),
        ),
        ("AC8", "scaling law", ac8, Duration::from_secs(60)),
        ("AC9", "composition bound", ac9, Duration::from_secs(60)),
        ("AC10", "sharpness negative control", ac10, Duration::from_secs(60)),
    ];
    let mut failures = 0;
    for (id, name, run, budget) in criteria {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let ok = out.ok && in_time;
        if !ok {
            failures += 1;
        }
        println!(
            "[{}] {id} {name}: {} [{:.2?} / budget {:?}{}]",
            if ok { "PASS" } else { "FAIL" },
            out.detail,
            elapsed,
            budget,
            if in_time { "" } else { ", over budget" }
        );
    }
    println!("{} of 10 criteria passed", 10 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
