use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plap_math::{conjugate_exponent, PLapParams};
use crate::solver::ProblemSpec;
use crate::tensorfield::{Grid, ScalarField, VectorField};

/// Explicit solution `u(x) = |x_1|^(p') / p'` of
/// `div(|grad u|^(p-2) grad u) = 1`, whose gradient
/// `sign(x_1) |x_1|^(1/(p-1)) e_1` has exactly the critical fractional smoothness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SharpnessOracle {
    p: f64,
    dim: usize,
}

impl SharpnessOracle {
    pub fn new(p: f64, dim: usize) -> Result<Self> {
        if !(p >= 2.0 && p.is_finite()) {
            return Err(Error::InvalidParameter(format!("oracle needs p >= 2, got {p}")));
        }
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidParameter(format!(
                "oracle dimension {dim} not in {{1, 2}}"
            )));
        }
        let oracle = Self { p, dim };
        // |u'|^(p-2) u' = x_1 on both sides of the kink
        for x in [-0.9, -0.31, 1e-3, 0.5, 1.0] {
            let du = oracle.derivative(x);
            let flux = du.abs().powf(p - 2.0) * du;
            if (flux - x).abs() > 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "flux identity fails at x = {x}: {flux}"
                )));
            }
        }
        Ok(oracle)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn p_conj(&self) -> f64 {
        conjugate_exponent(self.p)
    }

    pub fn value(&self, x1: f64) -> f64 {
        let pc = self.p_conj();
        x1.abs().powf(pc) / pc
    }

    /// `du/dx_1 = sign(x_1) |x_1|^(1/(p-1))`.
    pub fn derivative(&self, x1: f64) -> f64 {
        x1.signum() * x1.abs().powf(1.0 / (self.p - 1.0))
    }

    /// Default domain `(-1, 1)^dim` with `nodes` nodes per axis.
    pub fn grid(&self, nodes: usize) -> Result<Grid> {
        match self.dim {
            1 => Grid::line(-1.0, 1.0, nodes),
            _ => Grid::square(-1.0, 1.0, nodes),
        }
    }

    /// Nodal `(u, grad u, f)`; the gradient is the analytic one.
    pub fn fields(&self, grid: &Grid) -> Result<(ScalarField, VectorField, ScalarField)> {
        let u = ScalarField::from_fn(grid, |x| self.value(x[0]))?;
        let grad = VectorField::from_fn(grid, |x| [self.derivative(x[0]), 0.0])?;
        let f = ScalarField::constant(grid, 1.0)?;
        Ok((u, grad, f))
    }

    /// Dirichlet problem with `g = u` and `f = 1`.
    pub fn problem(&self, grid: &Grid, params: PLapParams) -> Result<ProblemSpec> {
        let (u, _, f) = self.fields(grid)?;
        let mut params = params;
        params.p = self.p;
        ProblemSpec::new(params, f, u)
    }
}

/// See [`SharpnessOracle::fields`].
pub fn oracle_fields(oracle: &SharpnessOracle, grid: &Grid) -> Result<(ScalarField, VectorField, ScalarField)> {
    oracle.fields(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensorfield::divergence;

    #[test]
    fn values_at_p3() {
        let o = SharpnessOracle::new(3.0, 1).unwrap();
        assert!((o.value(1.0) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(o.value(0.0), 0.0);
        assert!(SharpnessOracle::new(1.5, 1).is_err());
    }

    #[test]
    fn flux_is_x1_and_its_divergence_is_one() {
        for p in [3.0, 4.0, 5.5] {
            let o = SharpnessOracle::new(p, 2).unwrap();
            let grid = o.grid(17).unwrap();
            let (_, grad, _) = o.fields(&grid).unwrap();
            let flux = grad
                .map_vectors(|w| {
                    let r = (w[0] * w[0] + w[1] * w[1]).sqrt();
                    vec![r.powf(p - 2.0) * w[0], r.powf(p - 2.0) * w[1]]
                })
                .unwrap();
            for i in 0..grid.len() {
                assert!((flux.at(i)[0] - grid.coords(i)[0]).abs() < 1e-14);
            }
            assert!(divergence(&flux).values().iter().all(|v| (v - 1.0).abs() < 1e-12));
        }
    }
}
