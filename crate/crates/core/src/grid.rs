use crate::error::{Error, Result};

/// Positive wavenumber samples, strictly increasing, excluding `k = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct KGrid {
    k_values: Vec<f64>,
}

impl KGrid {
    pub fn new(k_values: Vec<f64>) -> Result<Self> {
        if k_values.is_empty() {
            return Err(Error::InvalidGrid("empty k-grid".into()));
        }
        if !(k_values[0] > 0.0) {
            return Err(Error::InvalidGrid("k-grid must exclude k ≤ 0".into()));
        }
        if k_values.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidGrid("k-grid must be strictly increasing".into()));
        }
        Ok(Self { k_values })
    }

    /// `k_j = j · k_max / n_k` for `j = 1..=n_k`.
    pub fn uniform(k_max: f64, n_k: usize) -> Result<Self> {
        if !(k_max > 0.0) || n_k == 0 {
            return Err(Error::InvalidGrid(format!("k_max = {k_max}, n_k = {n_k}")));
        }
        let dk = k_max / n_k as f64;
        Self::new((1..=n_k).map(|j| j as f64 * dk).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.k_values
    }

    pub fn len(&self) -> usize {
        self.k_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k_values.is_empty()
    }

    pub fn k_max(&self) -> f64 {
        *self.k_values.last().unwrap()
    }

    /// Index of the grid point closest to `k`.
    pub fn nearest(&self, k: f64) -> usize {
        let mut best = 0;
        for (i, &v) in self.k_values.iter().enumerate() {
            if (v - k).abs() < (self.k_values[best] - k).abs() {
                best = i;
            }
        }
        best
    }
}

/// Uniform grid `x_m = m·h`, `m = 0..n`, on `[0, x_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct XGrid {
    x_max: f64,
    points: usize,
}

impl XGrid {
    pub fn new(x_max: f64, points: usize) -> Result<Self> {
        if !(x_max > 0.0) || points < 5 {
            return Err(Error::InvalidGrid(format!("x_max = {x_max}, points = {points}")));
        }
        Ok(Self { x_max, points })
    }

    pub fn spacing(&self) -> f64 {
        self.x_max / (self.points - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn values(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.points).map(|m| m as f64 * h).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(KGrid::new(vec![0.0, 1.0]).is_err());
        assert!(KGrid::new(vec![1.0, 1.0]).is_err());
        assert!(KGrid::uniform(0.0, 10).is_err());
        assert!(XGrid::new(1.0, 2).is_err());
    }

    #[test]
    fn uniform_grid_ends_at_k_max() {
        let g = KGrid::uniform(40.0, 800).unwrap();
        assert_eq!(g.len(), 800);
        assert!((g.k_max() - 40.0).abs() < 1e-12);
        assert!((g.values()[0] - 0.05).abs() < 1e-15);
        assert_eq!(g.nearest(1.01), 19);
    }
}
