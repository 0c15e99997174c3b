//! Numerical laboratory for the epsilon-regularized p-Laplace energy.
//!
//! * [`tensorfield`]: grids, nodal fields, finite differences, interior masks.
//! * [`plap_math`]: pointwise maps `l_eps`, `L_eps`, `alpha^s`, `beta` and the
//!   algebraic inequalities behind the regularity estimates.
//! * [`solver`]: damped Newton minimization of the discrete energy.
//! * [`smoothness`]: Nikol'skii difference-quotient seminorms and exponent fits.
//! * [`experiments`]: verification harness built on the explicit solution
//!   `u = |x_1|^(p') / p'` of `div(|grad u|^(p-2) grad u) = 1`.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exec;
pub mod experiments;
pub mod plap_math;
pub mod smoothness;
pub mod solver;
pub mod tensorfield;

pub use error::{Error, Result};
