use serde::{Deserialize, Serialize};

use super::{SharpnessOracle, Verdict};
use crate::error::{Error, Result};
use crate::exec;
use crate::plap_math::{alpha_s, Mode, PLapParams};
use crate::smoothness::{sobolev_w12_norm, sobolev_w1p_norm};
use crate::solver::{solve_with, ProblemSpec, SolverOptions};
use crate::tensorfield::{gradient, InteriorMask};

/// Largest admissible max/min ratio of a norm over the smallest three `eps`.
pub const UNIFORMITY_FACTOR: f64 = 2.0;
/// Largest admissible growth of a norm between consecutive `eps` in the window.
pub const STEP_GROWTH: f64 = 1.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub p: f64,
    pub s: f64,
    pub eps_values: Vec<f64>,
    pub delta: f64,
    pub nodes: usize,
    pub dim: usize,
}

impl SweepConfig {
    /// Oracle sweep over `eps in {1e-1, 1e-2, 1e-3, 1e-4}` on 4097 nodes.
    pub fn new(p: f64, s: f64) -> Self {
        Self {
            p,
            s,
            eps_values: vec![1e-1, 1e-2, 1e-3, 1e-4],
            delta: 0.25,
            nodes: 4097,
            dim: 1,
        }
    }

    pub fn run(&self) -> Result<SweepResult> {
        let oracle = SharpnessOracle::new(self.p, self.dim)?;
        let grid = oracle.grid(self.nodes)?;
        let template = oracle.problem(&grid, PLapParams::new(self.p, self.eps_values[0]).with_s(self.s))?;
        run_eps_sweep(&template, self.s, &self.eps_values, self.delta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub eps: f64,
    /// `||u_eps||_{W^{1,p}}` over the whole grid.
    pub w1p_norm: f64,
    /// `||alpha^s_eps(grad u_eps)||_{W^{1,2}}` over the `delta`-interior.
    pub alpha_w12_norm: f64,
    pub el_residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepVerdicts {
    pub in_theorem_range: bool,
    /// max/min of the transformed norm over the three smallest `eps`.
    pub alpha_ratio: f64,
    pub w1p_ratio: f64,
    pub alpha_bounded: bool,
    pub w1p_bounded: bool,
    pub no_blow_up: bool,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub p: f64,
    pub s: f64,
    pub delta: f64,
    pub eps_values: Vec<f64>,
    pub per_eps: Vec<SweepCell>,
    pub verdicts: SweepVerdicts,
}

fn ratio(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::MIN, f64::max);
    let min = values.iter().cloned().fold(f64::MAX, f64::min);
    max / min
}

/// Solves the template at every `eps` (concurrently) and records the norms
/// whose `eps`-uniformity the regularity estimates assert.
///
/// An unconverged cell aborts the whole sweep.
pub fn run_eps_sweep(template: &ProblemSpec, s: f64, eps_values: &[f64], delta: f64) -> Result<SweepResult> {
    let p = template.params.p;
    if eps_values.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "a sweep needs at least 3 eps values, got {}",
            eps_values.len()
        )));
    }
    if let Some(e) = eps_values.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidParameter(format!("eps = {e} must be positive")));
    }
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidParameter(format!("s = {s} must be positive")));
    }
    let mask = InteriorMask::new(template.grid(), delta);
    if mask.is_empty() {
        return Err(Error::EmptyMask { delta });
    }
    let opts = SolverOptions::default();
    let cells = exec::map_slice(eps_values, |&eps| -> Result<SweepCell> {
        let spec = template.with_eps(eps);
        let res = solve_with(&spec, &opts, None)?;
        if !res.converged {
            return Err(Error::Solver(format!(
                "p = {p}, s = {s}, eps = {eps:e}: no convergence after {} iterations \
                 (el_residual {:e}, tolerance {:e})",
                res.iterations, res.el_residual, res.tol_res
            )));
        }
        let v = gradient(&res.u).map_vectors(|w| alpha_s(w, eps, s))?;
        Ok(SweepCell {
            eps,
            w1p_norm: sobolev_w1p_norm(&res.u, p),
            alpha_w12_norm: sobolev_w12_norm(&v, &mask)?,
            el_residual: res.el_residual,
            iterations: res.iterations,
        })
    });
    let per_eps = cells.into_iter().collect::<Result<Vec<_>>>()?;

    // window: the three smallest eps, ordered from large to small
    let mut order: Vec<usize> = (0..per_eps.len()).collect();
    order.sort_by(|&a, &b| per_eps[b].eps.total_cmp(&per_eps[a].eps));
    let window: Vec<&SweepCell> = order[order.len() - 3..].iter().map(|&i| &per_eps[i]).collect();
    let alpha: Vec<f64> = window.iter().map(|c| c.alpha_w12_norm).collect();
    let w1p: Vec<f64> = window.iter().map(|c| c.w1p_norm).collect();
    let (alpha_ratio, w1p_ratio) = (ratio(&alpha), ratio(&w1p));
    let no_blow_up = alpha.windows(2).all(|w| w[1] <= STEP_GROWTH * w[0]);

    let params = template.params.with_s(s);
    let mode = if p >= 3.0 { Mode::Thm2 } else { Mode::Thm3 };
    let in_theorem_range = params.s_in_range(mode);
    let alpha_bounded = alpha_ratio < UNIFORMITY_FACTOR;
    let w1p_bounded = w1p_ratio < UNIFORMITY_FACTOR;
    let verdict = if !in_theorem_range {
        Verdict::OutsideTheorem
    } else if alpha_bounded && w1p_bounded && no_blow_up {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(SweepResult {
        p,
        s,
        delta,
        eps_values: eps_values.to_vec(),
        per_eps,
        verdicts: SweepVerdicts {
            in_theorem_range,
            alpha_ratio,
            w1p_ratio,
            alpha_bounded,
            w1p_bounded,
            no_blow_up,
            verdict,
        },
    })
}
