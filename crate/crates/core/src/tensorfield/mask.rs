use super::grid::Grid;

/// Nodes whose max-norm `delta`-box lies in the closed domain box.
#[derive(Debug, Clone, PartialEq)]
pub struct InteriorMask {
    grid: Grid,
    delta: f64,
    flags: Vec<bool>,
}

impl InteriorMask {
    /// Builds the `delta`-interior. An empty result is reported through
    /// [`InteriorMask::is_empty`], not as an error.
    ///
    /// # Panics
    /// If `delta` is not positive.
    pub fn new(grid: &Grid, delta: f64) -> Self {
        assert!(delta > 0.0, "delta must be positive, got {delta}");
        // lattice rounding slack
        let slack = 1e-9 * grid.h_max();
        let flags = (0..grid.len())
            .map(|idx| {
                let x = grid.coords(idx);
                (0..grid.dim())
                    .all(|k| x[k] - delta >= grid.lower()[k] - slack && x[k] + delta <= grid.upper()[k] + slack)
            })
            .collect();
        Self {
            grid: grid.clone(),
            delta,
            flags,
        }
    }

    /// Every node flagged; used as the whole domain.
    pub fn full(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            delta: 0.0,
            flags: vec![true; grid.len()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.flags[idx]
    }

    pub fn count(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.flags.iter().any(|&f| f)
    }

    pub fn indices(&self) -> Vec<usize> {
        (0..self.flags.len()).filter(|&i| self.flags[i]).collect()
    }

    /// Sum of the trapezoid weights of flagged nodes.
    pub fn measure(&self) -> f64 {
        self.indices().iter().map(|&i| self.grid.node_weight(i)).sum()
    }

    pub fn is_subset_of(&self, other: &InteriorMask) -> bool {
        self.flags.iter().zip(&other.flags).all(|(&a, &b)| !a || b)
    }
}
