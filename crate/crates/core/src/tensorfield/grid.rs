use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform rectangular lattice over a box in one or two dimensions.
///
/// Nodes are stored row-major: in 2D the flat index of node `(i, j)` is
/// `i * nodes[1] + j`, so the second coordinate varies fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridMeta", into = "GridMeta")]
pub struct Grid {
    dim: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    nodes: Vec<usize>,
    spacing: Vec<f64>,
}

/// Sidecar metadata for field files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridMeta {
    pub dim: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub nodes: Vec<usize>,
}

impl TryFrom<GridMeta> for Grid {
    type Error = Error;

    fn try_from(meta: GridMeta) -> Result<Self> {
        if meta.dim != meta.lower.len() {
            return Err(Error::InvalidGrid(format!(
                "dim = {} but {} bounds given",
                meta.dim,
                meta.lower.len()
            )));
        }
        Grid::new(&meta.lower, &meta.upper, &meta.nodes)
    }
}

impl From<Grid> for GridMeta {
    fn from(grid: Grid) -> Self {
        GridMeta {
            dim: grid.dim,
            lower: grid.lower,
            upper: grid.upper,
            nodes: grid.nodes,
        }
    }
}

impl Grid {
    pub fn new(lower: &[f64], upper: &[f64], nodes: &[usize]) -> Result<Self> {
        let dim = lower.len();
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in {{1, 2}}")));
        }
        if upper.len() != dim || nodes.len() != dim {
            return Err(Error::InvalidGrid("bounds and node counts disagree in length".into()));
        }
        let mut spacing = Vec::with_capacity(dim);
        for k in 0..dim {
            if !(lower[k].is_finite() && upper[k].is_finite()) || upper[k] <= lower[k] {
                return Err(Error::InvalidGrid(format!(
                    "axis {k}: need finite lower < upper, got [{}, {}]",
                    lower[k], upper[k]
                )));
            }
            if nodes[k] < 3 {
                return Err(Error::InvalidGrid(format!(
                    "axis {k}: need at least 3 nodes, got {}",
                    nodes[k]
                )));
            }
            spacing.push((upper[k] - lower[k]) / (nodes[k] - 1) as f64);
        }
        nodes
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .filter(|&total| total.checked_mul(8 * dim.max(1)).is_some())
            .ok_or_else(|| Error::InvalidGrid("node count overflows addressable memory".into()))?;
        Ok(Grid {
            dim,
            lower: lower.to_vec(),
            upper: upper.to_vec(),
            nodes: nodes.to_vec(),
            spacing,
        })
    }

    pub fn line(lower: f64, upper: f64, nodes: usize) -> Result<Self> {
        Self::new(&[lower], &[upper], &[nodes])
    }

    /// Square `[lower, upper]^2` with `nodes` nodes per axis.
    pub fn square(lower: f64, upper: f64, nodes: usize) -> Result<Self> {
        Self::new(&[lower, lower], &[upper, upper], &[nodes, nodes])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    /// Largest spacing over all axes.
    pub fn h_max(&self) -> f64 {
        self.spacing.iter().copied().fold(0.0, f64::max)
    }

    /// Total number of nodes.
    pub fn len(&self) -> usize {
        self.nodes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Flat-index stride of axis `k`.
    pub fn stride(&self, k: usize) -> usize {
        if self.dim == 2 && k == 0 {
            self.nodes[1]
        } else {
            1
        }
    }

    /// Per-axis node index of a flat index. Unused axes are 0.
    pub fn multi_index(&self, idx: usize) -> [usize; 2] {
        match self.dim {
            1 => [idx, 0],
            _ => [idx / self.nodes[1], idx % self.nodes[1]],
        }
    }

    pub fn flat_index(&self, multi: [usize; 2]) -> usize {
        match self.dim {
            1 => multi[0],
            _ => multi[0] * self.nodes[1] + multi[1],
        }
    }

    /// Coordinate of node `i` along axis `k`; the last node sits exactly on `upper`.
    pub fn axis_coord(&self, k: usize, i: usize) -> f64 {
        if i + 1 == self.nodes[k] {
            self.upper[k]
        } else {
            self.lower[k] + i as f64 * self.spacing[k]
        }
    }

    /// Coordinates of a node; unused axes are 0.
    pub fn coords(&self, idx: usize) -> [f64; 2] {
        let m = self.multi_index(idx);
        let mut x = [0.0; 2];
        for (k, xk) in x.iter_mut().enumerate().take(self.dim) {
            *xk = self.axis_coord(k, m[k]);
        }
        x
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        let m = self.multi_index(idx);
        (0..self.dim).any(|k| m[k] == 0 || m[k] + 1 == self.nodes[k])
    }

    /// Trapezoid quadrature weight of a node.
    pub fn node_weight(&self, idx: usize) -> f64 {
        let m = self.multi_index(idx);
        (0..self.dim)
            .map(|k| {
                if m[k] == 0 || m[k] + 1 == self.nodes[k] {
                    0.5 * self.spacing[k]
                } else {
                    self.spacing[k]
                }
            })
            .product()
    }

    /// Measure of a full lattice cell.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    /// Measure of the domain box.
    pub fn volume(&self) -> f64 {
        (0..self.dim).map(|k| self.upper[k] - self.lower[k]).product()
    }

    /// Same box with `2 * (nodes - 1) + 1` nodes per axis.
    pub fn refined(&self) -> Grid {
        let nodes: Vec<usize> = self.nodes.iter().map(|&n| 2 * (n - 1) + 1).collect();
        Grid::new(&self.lower, &self.upper, &nodes).expect("refining a valid grid")
    }

    pub fn meta(&self) -> GridMeta {
        self.clone().into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_and_weights() {
        let g = Grid::line(-1.0, 1.0, 5).unwrap();
        assert_eq!(g.spacing(), &[0.5]);
        assert_eq!(g.axis_coord(0, 2), 0.0);
        assert_eq!(g.axis_coord(0, 4), 1.0);
        let total: f64 = (0..g.len()).map(|i| g.node_weight(i)).sum();
        assert!((total - 2.0).abs() < 1e-15);

        let g2 = Grid::new(&[0.0, 0.0], &[1.0, 2.0], &[3, 5]).unwrap();
        let total: f64 = (0..g2.len()).map(|i| g2.node_weight(i)).sum();
        assert!((total - 2.0).abs() < 1e-14);
        assert_eq!(g2.stride(0), 5);
        assert_eq!(g2.multi_index(7), [1, 2]);
        assert_eq!(g2.flat_index([1, 2]), 7);
        assert_eq!(g2.coords(7), [0.5, 1.0]);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::line(1.0, 1.0, 5).is_err());
        assert!(Grid::line(0.0, 1.0, 2).is_err());
        assert!(Grid::new(&[0.0; 3], &[1.0; 3], &[3; 3]).is_err());
        assert!(Grid::new(&[0.0], &[1.0, 2.0], &[3]).is_err());
    }

    #[test]
    fn meta_json_round_trip() {
        let g = Grid::new(&[0.0, -1.0], &[1.0, 1.0], &[4, 9]).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert!(s.contains("\"dim\":2"));
        let back: Grid = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<Grid>(r#"{"dim":1,"lower":[0],"upper":[0],"nodes":[4]}"#).is_err());
    }
}
