//! Compact discretization of the energy.
//!
//! The energy is a weighted sum over *elements*, each carrying one difference
//! quotient per axis taken along a lattice edge:
//!
//! * 1D: every edge `(i, i+1)`, weight `h`.
//! * 2D: every cell contributes four corner triangles; the triangle at a corner
//!   uses the two cell edges meeting there, weight `hx * hy / 4`. This is the
//!   average of the two diagonal P1 triangulations and has no checkerboard
//!   null space.
//!
//! The source term uses trapezoid (lumped) node weights. The exact gradient of
//! the discrete energy divided by the node weight is the discrete
//! Euler–Lagrange residual `f - div(grad L(grad u))`.

use crate::exec;
use crate::plap_math::{hessian_coefficients, l_eps};
use crate::tensorfield::Grid;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Element {
    pub weight: f64,
    /// `(lower, upper)` node pair per axis; unused axes repeat axis 0.
    pub edges: [(usize, usize); 2],
}

/// One occurrence of a node in an element difference: `(element, axis, sign)`.
#[derive(Debug, Clone, Copy)]
struct Incidence {
    element: usize,
    axis: usize,
    sign: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Discretization {
    pub grid: Grid,
    pub elements: Vec<Element>,
    pub inv_h: [f64; 2],
    pub node_weights: Vec<f64>,
    pub free: Vec<bool>,
    offsets: Vec<usize>,
    incidences: Vec<Incidence>,
}

/// Per-element Hessian data `D^2 L = a I + b g g^T` at the element gradient `g`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ElementCurvature {
    pub a: f64,
    pub b: f64,
    pub g: [f64; 2],
}

impl Discretization {
    pub fn new(grid: &Grid) -> Self {
        let dim = grid.dim();
        let mut elements = Vec::new();
        if dim == 1 {
            let h = grid.spacing()[0];
            for i in 0..grid.nodes()[0] - 1 {
                elements.push(Element {
                    weight: h,
                    edges: [(i, i + 1), (i, i + 1)],
                });
            }
        } else {
            let (n0, n1) = (grid.nodes()[0], grid.nodes()[1]);
            let weight = grid.cell_volume() / 4.0;
            for i in 0..n0 - 1 {
                for j in 0..n1 - 1 {
                    let at = |a: usize, b: usize| grid.flat_index([a, b]);
                    for (ci, cj) in [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)] {
                        // the two cell edges through corner (ci, cj)
                        let ex = (at(i, cj), at(i + 1, cj));
                        let ey = (at(ci, j), at(ci, j + 1));
                        elements.push(Element {
                            weight,
                            edges: [ex, ey],
                        });
                    }
                }
            }
        }

        let mut counts = vec![0usize; grid.len()];
        for el in &elements {
            for &(a, b) in &el.edges[..dim] {
                counts[a] += 1;
                counts[b] += 1;
            }
        }
        let mut offsets = vec![0usize; grid.len() + 1];
        for i in 0..grid.len() {
            offsets[i + 1] = offsets[i] + counts[i];
        }
        let mut fill = offsets.clone();
        let mut incidences = vec![
            Incidence {
                element: 0,
                axis: 0,
                sign: 0.0
            };
            offsets[grid.len()]
        ];
        for (e, el) in elements.iter().enumerate() {
            for (axis, &(a, b)) in el.edges[..dim].iter().enumerate() {
                incidences[fill[a]] = Incidence {
                    element: e,
                    axis,
                    sign: -1.0,
                };
                fill[a] += 1;
                incidences[fill[b]] = Incidence {
                    element: e,
                    axis,
                    sign: 1.0,
                };
                fill[b] += 1;
            }
        }

        let mut inv_h = [0.0; 2];
        for (ih, h) in inv_h.iter_mut().zip(grid.spacing()) {
            *ih = 1.0 / h;
        }
        Self {
            grid: grid.clone(),
            node_weights: (0..grid.len()).map(|i| grid.node_weight(i)).collect(),
            free: (0..grid.len()).map(|i| !grid.is_boundary(i)).collect(),
            elements,
            inv_h,
            offsets,
            incidences,
        }
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    /// Difference-quotient gradient of `u` on element `e`.
    pub fn element_gradient(&self, e: usize, u: &[f64]) -> [f64; 2] {
        let el = &self.elements[e];
        let mut g = [0.0; 2];
        for (k, gk) in g.iter_mut().enumerate().take(self.dim()) {
            let (a, b) = el.edges[k];
            *gk = (u[b] - u[a]) * self.inv_h[k];
        }
        g
    }

    /// `sum_e w_e phi(g_e)` in element order.
    pub fn element_sum<F>(&self, u: &[f64], phi: F) -> f64
    where
        F: Fn(&[f64]) -> f64 + Sync + Send,
    {
        let n = self.dim();
        exec::sum_indexed(self.elements.len(), |e| {
            let g = self.element_gradient(e, u);
            self.elements[e].weight * phi(&g[..n])
        })
    }

    /// Lumped `sum_i m_i u_i f_i`.
    pub fn source_term(&self, u: &[f64], f: &[f64]) -> f64 {
        exec::sum_indexed(u.len(), |i| self.node_weights[i] * u[i] * f[i])
    }

    /// Scatters per-element axis vectors `t_e` (already weighted) to nodes:
    /// `out_i = sum over incidences sign * inv_h[axis] * t_e[axis]`.
    fn gather(&self, per_element: &[[f64; 2]]) -> Vec<f64> {
        exec::map_indexed(self.grid.len(), |i| {
            self.incidences[self.offsets[i]..self.offsets[i + 1]]
                .iter()
                .map(|inc| inc.sign * self.inv_h[inc.axis] * per_element[inc.element][inc.axis])
                .sum()
        })
    }

    /// Gradient of the gradient-term `sum_e w_e L_eps(g_e)` with respect to every node.
    pub fn flux_gradient(&self, u: &[f64], eps: f64, p: f64) -> Vec<f64> {
        let n = self.dim();
        let fluxes = exec::map_indexed(self.elements.len(), |e| {
            let g = self.element_gradient(e, u);
            let scale = self.elements[e].weight * l_eps(&g[..n], eps).powf(p - 2.0);
            [scale * g[0], scale * g[1]]
        });
        self.gather(&fluxes)
    }

    pub fn curvatures(&self, u: &[f64], eps: f64, p: f64) -> Vec<ElementCurvature> {
        let n = self.dim();
        exec::map_indexed(self.elements.len(), |e| {
            let g = self.element_gradient(e, u);
            let l = l_eps(&g[..n], eps);
            let (a, b) = hessian_coefficients(l, p);
            // at l = 0 (eps = 0, flat element) only the isotropic part survives
            let b = if b.is_finite() { b } else { 0.0 };
            ElementCurvature { a, b, g }
        })
    }

    /// Hessian-vector product of the gradient term (all nodes, no masking).
    pub fn hess_vec(&self, curv: &[ElementCurvature], v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let per_element = exec::map_indexed(self.elements.len(), |e| {
            let c = &curv[e];
            let dv = self.element_gradient(e, v);
            let gdv: f64 = (0..n).map(|k| c.g[k] * dv[k]).sum();
            let w = self.elements[e].weight;
            let mut t = [0.0; 2];
            for k in 0..n {
                t[k] = w * (c.a * dv[k] + c.b * gdv * c.g[k]);
            }
            t
        });
        self.gather(&per_element)
    }

    /// Diagonal of the Hessian of the gradient term.
    pub fn hess_diag(&self, curv: &[ElementCurvature]) -> Vec<f64> {
        let n = self.dim();
        exec::map_indexed(self.grid.len(), |i| {
            let incs = &self.incidences[self.offsets[i]..self.offsets[i + 1]];
            // node i may appear on several axes of one element; group by element
            let mut total = 0.0;
            let mut k = 0;
            while k < incs.len() {
                let e = incs[k].element;
                let mut col = [0.0; 2];
                while k < incs.len() && incs[k].element == e {
                    col[incs[k].axis] += incs[k].sign * self.inv_h[incs[k].axis];
                    k += 1;
                }
                let c = &curv[e];
                let gc: f64 = (0..n).map(|d| c.g[d] * col[d]).sum();
                let cc: f64 = (0..n).map(|d| col[d] * col[d]).sum();
                total += self.elements[e].weight * (c.a * cc + c.b * gc * gc);
            }
            total
        })
    }

    /// Tridiagonal Hessian of the gradient term in 1D: `(lower, diag, upper)`.
    pub fn tridiagonal(&self, curv: &[ElementCurvature]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        debug_assert_eq!(self.dim(), 1);
        let len = self.grid.len();
        let mut lower = vec![0.0; len];
        let mut diag = vec![0.0; len];
        let mut upper = vec![0.0; len];
        let ih2 = self.inv_h[0] * self.inv_h[0];
        for (el, c) in self.elements.iter().zip(curv) {
            let (a, b) = el.edges[0];
            let k = el.weight * (c.a + c.b * c.g[0] * c.g[0]) * ih2;
            diag[a] += k;
            diag[b] += k;
            upper[a] -= k;
            lower[b] -= k;
        }
        (lower, diag, upper)
    }
}
