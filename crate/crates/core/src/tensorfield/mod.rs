//! Grids, nodal fields, finite-difference calculus and interior masks.

mod calculus;
mod field;
mod grid;
pub mod io;
mod mask;

pub use calculus::{adjointness_defect, divergence, gradient, jacobian};
pub use field::{ScalarField, VectorField};
pub use grid::{Grid, GridMeta};
pub use mask::InteriorMask;

/// Builds an interior mask; see [`InteriorMask::new`].
pub fn interior_mask(grid: &Grid, delta: f64) -> InteriorMask {
    InteriorMask::new(grid, delta)
}
