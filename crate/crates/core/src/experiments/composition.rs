use serde::{Deserialize, Serialize};

use super::{combine, theorem_thetas, SharpnessOracle, Verdict};
use crate::error::{Error, Result};
use crate::plap_math::{alpha_s, beta_theta};
use crate::smoothness::{composition_bound_check, ShiftFamily};
use crate::tensorfield::InteriorMask;

/// Hoelder constant of `beta_theta`.
pub const BETA_HOELDER_CONSTANT: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionConfig {
    pub p: f64,
    pub thetas: Vec<f64>,
    pub delta: f64,
    pub nodes: usize,
    pub dim: usize,
}

impl CompositionConfig {
    pub fn new(p: f64) -> Self {
        Self {
            p,
            thetas: theorem_thetas(p),
            delta: 0.5,
            nodes: 4097,
            dim: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompositionRow {
    pub theta: f64,
    /// `s = 1/theta`, so that `beta_theta(alpha^s_0(grad u)) = grad u`.
    pub s: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub constant: f64,
    pub w12_seminorm: f64,
    /// `max |beta_theta(V) - grad u|` over the nodes.
    pub roundtrip_error: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionReport {
    pub config: CompositionConfig,
    pub rows: Vec<CompositionRow>,
    pub verdict: Verdict,
}

/// Evaluates both sides of the composition bound for `V = alpha^(1/theta)_0(grad u)`
/// on the oracle, with the translate family over the `delta`-interior and the
/// Sobolev seminorm over the whole grid.
pub fn run_composition_check(config: &CompositionConfig) -> Result<CompositionReport> {
    if let Some(t) = config.thetas.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
        return Err(Error::InvalidParameter(format!("theta = {t} outside (0, 1)")));
    }
    let oracle = SharpnessOracle::new(config.p, config.dim)?;
    let grid = oracle.grid(config.nodes)?;
    let (_, grad, _) = oracle.fields(&grid)?;
    let family = ShiftFamily::dyadic(&grid, config.delta)?;
    let mask = InteriorMask::full(&grid);
    let mut rows = Vec::with_capacity(config.thetas.len());
    for &theta in &config.thetas {
        let s = 1.0 / theta;
        let v = grad.map_vectors(|w| alpha_s(w, 0.0, s))?;
        let back = v.map_vectors(|w| beta_theta(w, theta))?;
        let roundtrip_error = back
            .values()
            .iter()
            .zip(grad.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let chk = composition_bound_check(&v, theta, BETA_HOELDER_CONSTANT, &mask, &family)?;
        rows.push(CompositionRow {
            theta,
            s,
            lhs: chk.lhs,
            rhs: chk.rhs,
            constant: chk.constant,
            w12_seminorm: chk.w12_seminorm,
            roundtrip_error,
            verdict: if chk.holds() && roundtrip_error <= 1e-10 {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
        });
    }
    let verdict = combine(rows.iter().map(|r| r.verdict));
    Ok(CompositionReport {
        config: config.clone(),
        rows,
        verdict,
    })
}
