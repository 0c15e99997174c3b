use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use plapreg::experiments::{
    run_composition_check, run_eps_sweep, run_scaling_check, run_theorem1_check, CompositionConfig, SharpnessOracle,
    Theorem1Config, Verdict, VerificationReport,
};
use plapreg::plap_math::{Mode, PLapParams};
use plapreg::smoothness::{nikolskii_seminorm, seminorm_report, write_shift_table, NodalData, ShiftFamily};
use plapreg::solver::io::{read_problem, write_solve_result};
use plapreg::solver::{solve_with, ProblemSpec, SolverOptions};
use plapreg::tensorfield::io::{read_field_csv, read_grid_json, AnyField};
use plapreg::tensorfield::{gradient, Grid};
use serde::Serialize;

use crate::config::{echo, FieldKind, Settings, Suite};
use crate::usage;

const SWEEP_EPS: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];

fn default_nodes(dim: usize) -> usize {
    if dim == 1 {
        4097
    } else {
        257
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn prepare_out(settings: &Settings) -> Result<PathBuf> {
    let out = settings.out();
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    Ok(out)
}

fn require_p(settings: &Settings) -> Result<f64> {
    let p = settings.p.ok_or_else(|| usage("--p is required"))?;
    if !(p >= 2.0 && p.is_finite()) {
        return Err(usage(format!("--p {p}: need a finite p >= 2")));
    }
    Ok(p)
}

fn check_params(params: &PLapParams, mode: Mode) -> Result<()> {
    params.validate(mode).map_err(|e| usage(e.to_string()))
}

fn single_eps(settings: &Settings, default: f64) -> Result<f64> {
    let eps = match settings.eps.as_deref() {
        None => default,
        Some([e]) => *e,
        Some(list) => return Err(usage(format!("expected one --eps value, got {}", list.len()))),
    };
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(usage(format!("--eps {eps}: must be positive")));
    }
    Ok(eps)
}

fn oracle(settings: &Settings, p: f64) -> Result<(SharpnessOracle, Grid)> {
    let dim = settings.dim();
    if !(1..=2).contains(&dim) {
        return Err(usage(format!("--dim {dim}: only 1 and 2 are supported")));
    }
    let nodes = settings.nodes.unwrap_or_else(|| default_nodes(dim));
    if nodes < 3 {
        return Err(usage(format!("--nodes {nodes}: need at least 3")));
    }
    let o = SharpnessOracle::new(p, dim).map_err(|e| usage(e.to_string()))?;
    let grid = o.grid(nodes)?;
    Ok((o, grid))
}

/// Problem from `--input` (file or directory with `problem.json`) or the oracle.
fn problem(settings: &Settings, eps: Option<f64>) -> Result<ProblemSpec> {
    let mut spec = if let Some(input) = &settings.input {
        let path = if input.is_dir() {
            input.join("problem.json")
        } else {
            input.clone()
        };
        let mut spec = read_problem(&path).with_context(|| format!("reading problem {}", path.display()))?;
        if let Some(p) = settings.p {
            spec.params.p = p;
        }
        if let Some(eps) = eps {
            spec.params.eps = eps;
        }
        spec
    } else if settings.oracle.is_some() {
        let p = require_p(settings)?;
        let (o, grid) = oracle(settings, p)?;
        o.problem(&grid, PLapParams::new(p, eps.unwrap_or(1e-4)))?
    } else {
        return Err(usage("need --oracle sharp or --input <problem>"));
    };
    if let Some(s) = settings.s {
        spec.params.s = s;
    }
    if let Some(theta) = settings.theta {
        spec.params.theta = Some(theta);
    }
    if let Some(q) = settings.q {
        spec.params.q_nik = q;
    }
    check_params(&spec.params, settings.mode())?;
    Ok(spec)
}

pub fn solve(settings: &Settings) -> Result<u8> {
    // a problem file carries its own eps
    let eps = match (&settings.eps, &settings.input) {
        (None, Some(_)) => None,
        _ => Some(single_eps(settings, 1e-4)?),
    };
    let spec = problem(settings, eps)?;
    let out = prepare_out(settings)?;
    let res = solve_with(&spec, &SolverOptions::default(), None)?;
    write_solve_result(&out, &res)?;
    write_json(&out.join("config.json"), &echo("solve", settings))?;
    println!(
        "converged={} iterations={} energy={:e} el_residual={:e} (tol {:e}) -> {}",
        res.converged,
        res.iterations,
        res.energy,
        res.el_residual,
        res.tol_res,
        out.display()
    );
    Ok(if res.converged { 0 } else { 1 })
}

#[derive(Serialize)]
struct EstimateOutput<'a> {
    config: serde_json::Value,
    field: FieldKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    seminorm: Option<f64>,
    report: &'a plapreg::smoothness::SeminormReport,
}

fn load_input_field(input: &Path, kind: FieldKind) -> Result<Box<dyn NodalData>> {
    let (file, grid_path) = if input.is_dir() {
        (input.join("u.csv"), input.join("grid.json"))
    } else {
        let dir = input.parent().unwrap_or_else(|| Path::new("."));
        (input.to_path_buf(), dir.join("grid.json"))
    };
    if !file.exists() {
        return Err(usage(format!("input field {} does not exist", file.display())));
    }
    let grid = read_grid_json(&grid_path).with_context(|| format!("reading grid {}", grid_path.display()))?;
    Ok(match (read_field_csv(&file, &grid)?, kind) {
        (AnyField::Scalar(u), FieldKind::Value) => Box::new(u),
        (AnyField::Scalar(u), FieldKind::Grad) => Box::new(gradient(&u)),
        (AnyField::Vector(v), FieldKind::Value) => Box::new(v),
        (AnyField::Vector(_), FieldKind::Grad) => return Err(usage("--field grad needs a scalar input")),
    })
}

pub fn estimate(settings: &Settings) -> Result<u8> {
    let q = settings.q.unwrap_or(2.0);
    if !(q >= 1.0) {
        return Err(usage(format!("--q {q}: L^q needs q >= 1")));
    }
    let delta = settings.delta.unwrap_or(0.5);
    if !(delta > 0.0) {
        return Err(usage(format!("--delta {delta}: must be positive")));
    }
    if let Some(theta) = settings.theta {
        if !(0.0..=1.0).contains(&theta) {
            return Err(usage(format!("--theta {theta}: must lie in [0, 1]")));
        }
    }
    let (field, kind): (Box<dyn NodalData>, FieldKind) = if let Some(input) = &settings.input {
        let kind = settings.field.unwrap_or(FieldKind::Value);
        (load_input_field(input, kind)?, kind)
    } else if settings.oracle.is_some() {
        let p = require_p(settings)?;
        let (o, grid) = oracle(settings, p)?;
        let (u, grad, _) = o.fields(&grid)?;
        match settings.field.unwrap_or(FieldKind::Grad) {
            FieldKind::Grad => (Box::new(grad), FieldKind::Grad),
            FieldKind::Value => (Box::new(u), FieldKind::Value),
        }
    } else {
        return Err(usage("estimate needs --input <field> or --oracle sharp"));
    };
    let family = ShiftFamily::dyadic(field.grid(), delta)?;
    let report = seminorm_report(field.as_ref(), q, &family)?;
    let seminorm = match settings.theta {
        Some(theta) => Some(nikolskii_seminorm(field.as_ref(), q, theta, &family)?),
        None => None,
    };
    let out = prepare_out(settings)?;
    write_json(
        &out.join("seminorm.json"),
        &EstimateOutput {
            config: echo("estimate", settings),
            field: kind,
            seminorm,
            report: &report,
        },
    )?;
    write_shift_table(out.join("shifts.csv"), &report)?;
    println!(
        "theta_hat={:.6} r2={:.6} constant_like={} clipped={} -> {}",
        report.fitted_theta,
        report.fit_r2,
        report.constant_like,
        report.clipped,
        out.display()
    );
    Ok(0)
}

fn finish(settings: &Settings, report: VerificationReport) -> Result<u8> {
    let out = prepare_out(settings)?;
    report.write(&out)?;
    let verdict = report.verdict();
    println!("verdict: {} -> {}", label(verdict), out.display());
    Ok(if verdict == Verdict::Fail { 1 } else { 0 })
}

fn label(v: Verdict) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_default()
}

fn eps_list(settings: &Settings) -> Result<Vec<f64>> {
    let list = settings.eps.clone().unwrap_or_else(|| SWEEP_EPS.to_vec());
    if list.len() < 3 || list.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(usage("a sweep needs at least three positive --eps values"));
    }
    Ok(list)
}

fn p_list(settings: &Settings, default: &[f64]) -> Result<Vec<f64>> {
    let ps = match settings.p {
        Some(_) => vec![require_p(settings)?],
        None => default.to_vec(),
    };
    for &p in &ps {
        check_params(&PLapParams::new(p, 0.0), settings.mode())?;
    }
    Ok(ps)
}

fn sweeps(settings: &Settings, report: &mut VerificationReport, ps: &[f64]) -> Result<()> {
    let eps = eps_list(settings)?;
    let delta = settings.delta.unwrap_or(0.25);
    for &p in ps {
        let ss = match settings.s {
            Some(s) => vec![s],
            None => vec![p / 2.0, (p - 1.0) / 2.0 + 0.1],
        };
        let template = if settings.input.is_some() {
            problem(settings, Some(eps[0]))?
        } else {
            let (o, grid) = oracle(settings, p)?;
            o.problem(&grid, PLapParams::new(p, eps[0]))?
        };
        for s in ss {
            if settings.mode.is_some() {
                check_params(&template.params.with_s(s), settings.mode())?;
            }
            let r = run_eps_sweep(&template, s, &eps, delta)?;
            println!(
                "eps-uniform p={p} s={s}: alpha ratio {:.4}, W^{{1,p}} ratio {:.4} -> {}",
                r.verdicts.alpha_ratio,
                r.verdicts.w1p_ratio,
                label(r.verdicts.verdict)
            );
            report.sweeps.push(r);
        }
    }
    Ok(())
}

pub fn sweep(settings: &Settings) -> Result<u8> {
    let ps = if settings.input.is_some() {
        let spec = problem(settings, None)?;
        vec![spec.params.p]
    } else {
        vec![require_p(settings)?]
    };
    let mut report = VerificationReport {
        config: echo("sweep", settings),
        ..Default::default()
    };
    sweeps(settings, &mut report, &ps)?;
    finish(settings, report)
}

pub fn verify(settings: &Settings) -> Result<u8> {
    let suite = settings.suite.unwrap_or(Suite::All);
    let run = |s: Suite| suite == s || suite == Suite::All;
    let mut report = VerificationReport {
        config: echo("verify", settings),
        ..Default::default()
    };
    if let Some(theta) = settings.theta {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(usage(format!("--theta {theta}: must lie in (0, 1)")));
        }
    }
    if let Some(q) = settings.q {
        if !(q >= 1.0) {
            return Err(usage(format!("--q {q}: L^q needs q >= 1")));
        }
    }
    if run(Suite::Theorem1) {
        for p in p_list(settings, &[3.0, 4.0, 5.0])? {
            let mut config = Theorem1Config::for_p(p);
            config.dim = settings.dim();
            config.nodes = settings.nodes.unwrap_or_else(|| default_nodes(config.dim));
            config.delta = settings.delta.unwrap_or(config.delta);
            if let Some(q) = settings.q {
                config.qs = vec![q];
            }
            if let Some(theta) = settings.theta {
                config.thetas = vec![theta];
            }
            let r = run_theorem1_check(&config)?;
            for row in &r.rows {
                println!(
                    "theorem1 p={p} q={}: theta_hat {:.4} vs {:.4} (r2 {:.5}) -> {}",
                    row.q,
                    row.theta_hat,
                    row.theta_pred,
                    row.r2,
                    label(row.verdict)
                );
            }
            report.theorem1.push(r);
        }
    }
    if run(Suite::EpsUniform) {
        let ps = p_list(settings, &[3.0, 4.0])?;
        sweeps(settings, &mut report, &ps)?;
    }
    if run(Suite::Scaling) {
        let lambdas = settings.lambda.clone().unwrap_or_else(|| vec![0.5, 2.0]);
        if let Some(l) = lambdas.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
            return Err(usage(format!("--lambda {l}: must be positive")));
        }
        let eps = single_eps(settings, 1e-3)?;
        let delta = settings.delta.unwrap_or(0.25);
        for p in p_list(settings, &[3.0, 4.0])? {
            let (o, grid) = oracle(settings, p)?;
            let s = settings.s.unwrap_or(p / 2.0);
            let spec = o.problem(&grid, PLapParams::new(p, eps).with_s(s))?;
            for &lambda in &lambdas {
                let r = run_scaling_check(&spec, lambda, delta)?;
                println!(
                    "scaling p={p} lambda={lambda}: |u_l - l u| {:.2e} (tol {:.2e}), norm rel err {:.2e} -> {}",
                    r.solution_max_diff,
                    r.solution_tolerance,
                    r.norm_rel_err,
                    label(r.verdict)
                );
                report.scaling.push(r);
            }
        }
    }
    if run(Suite::Composition) {
        for p in p_list(settings, &[3.0, 4.0, 5.0])? {
            let mut config = CompositionConfig::new(p);
            config.dim = settings.dim();
            config.nodes = settings.nodes.unwrap_or_else(|| default_nodes(config.dim));
            config.delta = settings.delta.unwrap_or(config.delta);
            if let Some(theta) = settings.theta {
                config.thetas = vec![theta];
            }
            let r = run_composition_check(&config)?;
            for row in &r.rows {
                println!(
                    "composition p={p} theta={:.4}: {:.4} <= {:.4} -> {}",
                    row.theta,
                    row.lhs,
                    row.rhs,
                    label(row.verdict)
                );
            }
            report.composition.push(r);
        }
    }
    finish(settings, report)
}
