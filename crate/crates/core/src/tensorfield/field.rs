use super::grid::Grid;
use crate::error::{Error, Result};
use crate::exec;

fn check_finite(values: &[f64], width: usize) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(pos) => Err(Error::NonFinite { node: pos / width }),
        None => Ok(()),
    }
}

/// One finite real per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        check_finite(&values, 1)?;
        Ok(Self { grid, values })
    }

    pub fn constant(grid: &Grid, value: f64) -> Result<Self> {
        Self::new(grid.clone(), vec![value; grid.len()])
    }

    /// Samples `f` at every node; `f` receives the node coordinates.
    pub fn from_fn<F>(grid: &Grid, f: F) -> Result<Self>
    where
        F: Fn([f64; 2]) -> f64 + Sync + Send,
    {
        let values = exec::map_indexed(grid.len(), |i| f(grid.coords(i)));
        Self::new(grid.clone(), values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map<F>(&self, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64,
    {
        Self::new(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise `a * self + b * other`.
    pub fn axpby(&self, a: f64, other: &ScalarField, b: f64) -> Result<Self> {
        if other.grid != self.grid {
            return Err(Error::ShapeMismatch {
                expected: self.values.len(),
                got: other.values.len(),
            });
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Self::new(self.grid.clone(), values)
    }

    /// Trapezoid-weighted `L^q` norm; `q = inf` gives the max norm.
    pub fn lq_norm(&self, q: f64) -> f64 {
        if q.is_infinite() {
            return self.values.iter().fold(0.0, |m, v| m.max(v.abs()));
        }
        let sum = exec::sum_indexed(self.values.len(), |i| {
            self.grid.node_weight(i) * self.values[i].abs().powf(q)
        });
        sum.powf(1.0 / q)
    }

    pub fn max_abs_diff(&self, other: &ScalarField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// One finite `dim`-vector per grid node, stored node-major.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Grid,
    values: Vec<f64>,
}

impl VectorField {
    /// `values` holds `grid.dim()` components per node, node-major.
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        let n = grid.dim();
        if values.len() != grid.len() * n {
            return Err(Error::ShapeMismatch {
                expected: grid.len() * n,
                got: values.len(),
            });
        }
        check_finite(&values, n)?;
        Ok(Self { grid, values })
    }

    pub fn from_fn<F>(grid: &Grid, f: F) -> Result<Self>
    where
        F: Fn([f64; 2]) -> [f64; 2] + Sync + Send,
    {
        let n = grid.dim();
        let per_node = exec::map_indexed(grid.len(), |i| f(grid.coords(i)));
        let values = per_node.iter().flat_map(|v| v[..n].iter().copied()).collect();
        Self::new(grid.clone(), values)
    }

    /// Builds a field by stacking component scalar fields.
    pub fn from_components(components: &[ScalarField]) -> Result<Self> {
        let grid = components
            .first()
            .ok_or_else(|| Error::InvalidParameter("no components".into()))?
            .grid()
            .clone();
        let n = grid.dim();
        if components.len() != n || components.iter().any(|c| c.grid() != &grid) {
            return Err(Error::InvalidParameter(format!("need {n} components on a common grid")));
        }
        let mut values = Vec::with_capacity(grid.len() * n);
        for i in 0..grid.len() {
            for c in components {
                values.push(c.values()[i]);
            }
        }
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, node: usize) -> &[f64] {
        let n = self.dim();
        &self.values[node * n..(node + 1) * n]
    }

    pub fn component(&self, k: usize) -> ScalarField {
        let n = self.dim();
        let values = self.values.iter().skip(k).step_by(n).copied().collect();
        ScalarField::new(self.grid.clone(), values).expect("component of a valid field")
    }

    /// Applies a pointwise map `R^n -> R^n` at every node.
    pub fn map_vectors<F>(&self, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Vec<f64> + Sync + Send,
    {
        let per_node = exec::map_indexed(self.grid.len(), |i| f(self.at(i)));
        Self::new(self.grid.clone(), per_node.concat())
    }

    /// Pointwise Euclidean magnitude.
    pub fn magnitude(&self) -> ScalarField {
        let values = (0..self.grid.len())
            .map(|i| self.at(i).iter().map(|c| c * c).sum::<f64>().sqrt())
            .collect();
        ScalarField::new(self.grid.clone(), values).expect("magnitude of a finite field")
    }

    pub fn scale(&self, a: f64) -> Result<Self> {
        Self::new(self.grid.clone(), self.values.iter().map(|v| a * v).collect())
    }

    /// Trapezoid-weighted `L^q` norm of the pointwise magnitude.
    pub fn lq_norm(&self, q: f64) -> f64 {
        self.magnitude().lq_norm(q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_checks() {
        let g = Grid::line(0.0, 1.0, 5).unwrap();
        assert!(matches!(
            ScalarField::new(g.clone(), vec![0.0; 4]),
            Err(Error::ShapeMismatch { expected: 5, got: 4 })
        ));
        assert!(matches!(
            ScalarField::new(g.clone(), vec![0.0, 1.0, f64::NAN, 0.0, 0.0]),
            Err(Error::NonFinite { node: 2 })
        ));
        let g2 = Grid::square(0.0, 1.0, 3).unwrap();
        let mut v = vec![0.0; 18];
        v[9] = f64::INFINITY;
        assert!(matches!(VectorField::new(g2, v), Err(Error::NonFinite { node: 4 })));
    }

    #[test]
    fn components_round_trip() {
        let g = Grid::square(0.0, 1.0, 4).unwrap();
        let f = VectorField::from_fn(&g, |x| [x[0], 2.0 * x[1]]).unwrap();
        let rebuilt = VectorField::from_components(&[f.component(0), f.component(1)]).unwrap();
        assert_eq!(f, rebuilt);
        assert_eq!(f.at(5), &[1.0 / 3.0, 2.0 / 3.0]);
    }

    #[test]
    fn lq_norm_of_constant() {
        let g = Grid::new(&[0.0, 0.0], &[2.0, 1.0], &[5, 7]).unwrap();
        let u = ScalarField::constant(&g, 3.0).unwrap();
        assert!((u.lq_norm(2.0) - 3.0 * 2f64.sqrt()).abs() < 1e-13);
        assert_eq!(u.lq_norm(f64::INFINITY), 3.0);
    }
}
