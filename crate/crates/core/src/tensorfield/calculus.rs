//! Nodal finite differences.
//!
//! Interior nodes use central differences, boundary nodes the one-sided
//! second-order stencils `(-3u_0 + 4u_1 - u_2) / 2h` and its mirror. Both are
//! exact on affine data. `divergence` applies the same stencil per component,
//! so it is not the exact negative adjoint of `gradient`: with trapezoid
//! weights and `phi = 0` on the boundary the defect
//! `<F, grad phi> + <div F, phi>` collects only terms from the first two node
//! layers next to the boundary (see [`adjointness_defect`]).

use super::field::{ScalarField, VectorField};
use super::grid::Grid;
use crate::exec;

/// Derivative along axis `k` of flat nodal data at node `idx`.
pub(crate) fn axis_derivative(
    grid: &Grid,
    data: &[f64],
    stride_width: usize,
    comp: usize,
    k: usize,
    idx: usize,
) -> f64 {
    let n = grid.nodes()[k];
    let h = grid.spacing()[k];
    let i = grid.multi_index(idx)[k];
    let s = grid.stride(k);
    let at = |node: usize| data[node * stride_width + comp];
    if i == 0 {
        (-3.0 * at(idx) + 4.0 * at(idx + s) - at(idx + 2 * s)) / (2.0 * h)
    } else if i + 1 == n {
        (3.0 * at(idx) - 4.0 * at(idx - s) + at(idx - 2 * s)) / (2.0 * h)
    } else {
        (at(idx + s) - at(idx - s)) / (2.0 * h)
    }
}

pub fn gradient(u: &ScalarField) -> VectorField {
    let grid = u.grid();
    let n = grid.dim();
    let per_node = exec::map_indexed(grid.len(), |idx| {
        let mut g = [0.0; 2];
        for (k, gk) in g.iter_mut().enumerate().take(n) {
            *gk = axis_derivative(grid, u.values(), 1, 0, k, idx);
        }
        g
    });
    let values = per_node.iter().flat_map(|g| g[..n].iter().copied()).collect();
    VectorField::new(grid.clone(), values).expect("differences of finite data are finite")
}

pub fn divergence(field: &VectorField) -> ScalarField {
    let grid = field.grid();
    let n = grid.dim();
    let values = exec::map_indexed(grid.len(), |idx| {
        (0..n)
            .map(|k| axis_derivative(grid, field.values(), n, k, k, idx))
            .sum()
    });
    ScalarField::new(grid.clone(), values).expect("differences of finite data are finite")
}

/// Nodal Jacobian `dV_i/dx_k`, stored node-major as `[i * dim + k]`.
pub fn jacobian(field: &VectorField) -> Vec<f64> {
    let grid = field.grid();
    let n = grid.dim();
    let per_node = exec::map_indexed(grid.len(), |idx| {
        let mut j = [0.0; 4];
        for i in 0..n {
            for k in 0..n {
                j[i * n + k] = axis_derivative(grid, field.values(), n, i, k, idx);
            }
        }
        j
    });
    per_node.iter().flat_map(|j| j[..n * n].iter().copied()).collect()
}

/// `<F, gradient(phi)> + <divergence(F), phi>` with trapezoid weights.
///
/// For `phi` vanishing on the boundary this equals, per grid line along axis
/// `k` and per end of that line, `w_perp * F_k(b) * (2 phi_1 - phi_2) / 4`
/// with sign `+` at the lower end and `-` at the upper end, where `b` is the
/// boundary node, `phi_1, phi_2` the next two nodes inward and `w_perp` the
/// trapezoid weight of the line in the remaining directions. It vanishes when
/// `phi` is zero on the two outermost layers.
pub fn adjointness_defect(field: &VectorField, phi: &ScalarField) -> f64 {
    let grid = field.grid();
    let grad_phi = gradient(phi);
    let div = divergence(field);
    exec::sum_indexed(grid.len(), |i| {
        let flux: f64 = field.at(i).iter().zip(grad_phi.at(i)).map(|(a, b)| a * b).sum();
        grid.node_weight(i) * (flux + div.values()[i] * phi.values()[i])
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_and_affine_exactness() {
        let g = Grid::new(&[-1.0, 0.0], &[1.0, 3.0], &[7, 9]).unwrap();
        let c = ScalarField::constant(&g, 2.5).unwrap();
        assert!(gradient(&c).values().iter().all(|&v| v == 0.0));

        let u = ScalarField::from_fn(&g, |x| 3.0 * x[0] - 2.0 * x[1] + 1.0).unwrap();
        let du = gradient(&u);
        for i in 0..g.len() {
            assert!((du.at(i)[0] - 3.0).abs() < 1e-12);
            assert!((du.at(i)[1] + 2.0).abs() < 1e-12);
        }

        let f = VectorField::from_fn(&g, |x| [x[0], 0.0]).unwrap();
        assert!(divergence(&f).values().iter().all(|&v| (v - 1.0).abs() < 1e-12));
        let k = VectorField::from_fn(&g, |_| [4.0, -1.0]).unwrap();
        assert!(divergence(&k).values().iter().all(|&v| v.abs() < 1e-12));
    }

    #[test]
    fn sine_derivative_is_second_order() {
        // max error against cos on successively refined grids
        let err = |nodes: usize| {
            let g = Grid::line(0.0, 3.0, nodes).unwrap();
            let u = ScalarField::from_fn(&g, |x| x[0].sin()).unwrap();
            let du = gradient(&u);
            (0..g.len())
                .map(|i| (du.at(i)[0] - g.coords(i)[0].cos()).abs())
                .fold(0.0, f64::max)
        };
        let h = 0.01;
        let nodes = (3.0f64 / h).round() as usize + 1;
        let e1 = err(nodes);
        let e2 = err(2 * (nodes - 1) + 1);
        // one-sided boundary stencil has error h^2/3 * |u'''|
        assert!(e1 <= 0.5 * h * h, "e1 = {e1}");
        assert!(e1 / e2 > 3.5, "ratio = {}", e1 / e2);
    }

    #[test]
    fn defect_matches_boundary_formula_1d() {
        let g = Grid::line(0.0, 1.0, 11).unwrap();
        let phi = ScalarField::from_fn(&g, |x| (x[0] * (1.0 - x[0])).powi(2) + x[0] * (1.0 - x[0])).unwrap();
        let f = VectorField::from_fn(&g, |x| [(3.0 * x[0]).cos() + x[0] * x[0], 0.0]).unwrap();
        let n = g.len();
        let p = phi.values();
        let fb = |i: usize| f.at(i)[0];
        let expected = fb(0) * (2.0 * p[1] - p[2]) / 4.0 - fb(n - 1) * (2.0 * p[n - 2] - p[n - 3]) / 4.0;
        let got = adjointness_defect(&f, &phi);
        assert!((got - expected).abs() < 1e-13, "{got} vs {expected}");
    }

    #[test]
    fn defect_vanishes_away_from_boundary_2d() {
        let g = Grid::square(0.0, 1.0, 13).unwrap();
        let phi = ScalarField::from_fn(&g, |x| {
            let bump = |t: f64| {
                if (0.2..=0.8).contains(&t) {
                    (t - 0.2) * (0.8 - t)
                } else {
                    0.0
                }
            };
            bump(x[0]) * bump(x[1])
        })
        .unwrap();
        let f = VectorField::from_fn(&g, |x| [x[1].sin() + x[0], x[0] * x[1]]).unwrap();
        assert!(adjointness_defect(&f, &phi).abs() < 1e-15);
    }
}
