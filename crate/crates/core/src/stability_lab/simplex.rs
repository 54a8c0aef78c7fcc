use crate::error::{LabError, Result};
use crate::stats_core::RngStream;

/// A point in the interior of the probability simplex.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexPoint {
    x: Vec<f64>,
}

impl SimplexPoint {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        if x.len() < 2 {
            return Err(LabError::domain(
                "SimplexPoint",
                "need at least 2 coordinates",
            ));
        }
        if x.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(LabError::domain(
                "SimplexPoint",
                "coordinates must be strictly positive (interior point)",
            ));
        }
        let sum: f64 = x.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(LabError::domain(
                "SimplexPoint",
                format!("coordinates sum to {sum}, not 1"),
            ));
        }
        Ok(Self { x })
    }

    pub fn uniform(r: usize) -> Result<Self> {
        Self::new(vec![1.0 / r as f64; r])
    }

    /// Uniform (flat Dirichlet) draw from the interior.
    pub fn random(r: usize, rng: &mut RngStream) -> Result<Self> {
        if r < 2 {
            return Err(LabError::domain(
                "SimplexPoint",
                "need at least 2 coordinates",
            ));
        }
        let e: Vec<f64> = (0..r).map(|_| -rng.uniform_open().ln()).collect();
        let total: f64 = e.iter().sum();
        Self::new(e.into_iter().map(|v| v / total).collect())
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.x
    }

    /// The point with coordinates reordered as `x[perm[0]], x[perm[1]], ...`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.dim() {
            return Err(LabError::LengthMismatch {
                expected: self.dim(),
                got: perm.len(),
            });
        }
        Self::new(perm.iter().map(|&i| self.x[i]).collect())
    }

    /// Per-coordinate noise scales `x_i^{-1/2}`.
    pub(crate) fn scales(&self) -> Vec<f64> {
        self.x.iter().map(|v| v.sqrt().recip()).collect()
    }

    pub fn spread(&self) -> f64 {
        let max = self.x.iter().copied().fold(f64::MIN, f64::max);
        let min = self.x.iter().copied().fold(f64::MAX, f64::min);
        max - min
    }
}
