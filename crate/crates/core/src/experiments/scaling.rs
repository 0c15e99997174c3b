use serde::{Deserialize, Serialize};

use super::{SharpnessOracle, Verdict};
use crate::error::{Error, Result};
use crate::plap_math::{alpha_s, PLapParams};
use crate::smoothness::sobolev_w12_norm;
use crate::solver::{solve_with, ProblemSpec, SolveResult, SolverOptions};
use crate::tensorfield::{gradient, InteriorMask, ScalarField};

/// Relative tolerance on the `lambda^s` homogeneity of the transformed norm.
pub const HOMOGENEITY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingConfig {
    pub p: f64,
    pub s: f64,
    pub eps: f64,
    pub lambda: f64,
    pub delta: f64,
    pub nodes: usize,
    pub dim: usize,
}

impl ScalingConfig {
    pub fn new(p: f64, lambda: f64) -> Self {
        Self {
            p,
            s: p / 2.0,
            eps: 1e-3,
            lambda,
            delta: 0.25,
            nodes: 2049,
            dim: 1,
        }
    }

    pub fn run(&self) -> Result<ScalingReport> {
        let oracle = SharpnessOracle::new(self.p, self.dim)?;
        let grid = oracle.grid(self.nodes)?;
        let spec = oracle.problem(&grid, PLapParams::new(self.p, self.eps).with_s(self.s))?;
        run_scaling_check(&spec, self.lambda, self.delta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub p: f64,
    pub s: f64,
    pub eps: f64,
    pub lambda: f64,
    /// `max |u_lambda - lambda u|`.
    pub solution_max_diff: f64,
    /// `10 tol_res` of the scaled problem.
    pub solution_tolerance: f64,
    pub solution_ok: bool,
    /// `||alpha^s_0(grad u)||_{W^{1,2}}` over the `delta`-interior.
    pub alpha_norm: f64,
    /// Same norm for `lambda u`.
    pub alpha_norm_scaled: f64,
    pub norm_rel_err: f64,
    pub norm_ok: bool,
    pub verdict: Verdict,
}

fn converged(spec: &ProblemSpec, opts: &SolverOptions, what: &str) -> Result<SolveResult> {
    let res = solve_with(spec, opts, None)?;
    if !res.converged {
        return Err(Error::Solver(format!(
            "{what} problem (eps = {:e}): no convergence after {} iterations",
            spec.params.eps, res.iterations
        )));
    }
    Ok(res)
}

/// Checks that `(lambda g, lambda^(p-1) f, lambda eps)` is solved by `lambda u`
/// and that `alpha^s_0` is `s`-homogeneous on the computed gradient.
pub fn run_scaling_check(spec: &ProblemSpec, lambda: f64, delta: f64) -> Result<ScalingReport> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda = {lambda} must be positive")));
    }
    let opts = SolverOptions::default();
    let scaled = spec.scaled(lambda)?;
    let base = converged(spec, &opts, "base")?;
    let other = converged(&scaled, &opts, "scaled")?;
    let lifted = base.u.map(|v| lambda * v)?;
    let solution_max_diff = other.u.max_abs_diff(&lifted);
    let solution_tolerance = 10.0 * scaled.residual_tolerance(&opts);

    let s = spec.params.s;
    let mask = InteriorMask::new(spec.grid(), delta);
    let norm = |u: &ScalarField| -> Result<f64> {
        let v = gradient(u).map_vectors(|w| alpha_s(w, 0.0, s))?;
        sobolev_w12_norm(&v, &mask)
    };
    let alpha_norm = norm(&base.u)?;
    let alpha_norm_scaled = norm(&lifted)?;
    let expected = lambda.powf(s) * alpha_norm;
    let norm_rel_err = (alpha_norm_scaled - expected).abs() / expected.abs().max(f64::MIN_POSITIVE);

    let solution_ok = solution_max_diff <= solution_tolerance;
    let norm_ok = norm_rel_err <= HOMOGENEITY_TOLERANCE;
    Ok(ScalingReport {
        p: spec.params.p,
        s,
        eps: spec.params.eps,
        lambda,
        solution_max_diff,
        solution_tolerance,
        solution_ok,
        alpha_norm,
        alpha_norm_scaled,
        norm_rel_err,
        norm_ok,
        verdict: if solution_ok && norm_ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
    })
}
