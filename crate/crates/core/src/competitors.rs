//! Baseline two-sample statistics.
//!
//! Both are calibrated by the same permutation engine as the sparse
//! eigenvalue statistic.

use nalgebra::DMatrix;

use crate::engine::relationship::center_columns;
use crate::error::{Result, SledError};
use crate::matrix::{DataMatrix, SymmetricMatrix};

/// Plug-in squared Frobenius norm `sum_ij d_ij^2`.
pub fn frobenius_statistic(d: &SymmetricMatrix) -> f64 {
    d.as_matrix().norm_squared()
}

/// Normalized max-entry statistic
/// `max_ij (s1_ij - s2_ij)^2 / (theta1_ij / n + theta2_ij / m)`, where
/// `theta_ij` is the empirical variance of the centered cross-products
/// `(x_ki - xbar_i)(x_kj - xbar_j)` within a group.
pub fn max_statistic(x: &DataMatrix, y: &DataMatrix) -> Result<f64> {
    if x.p() != y.p() {
        return Err(SledError::DimensionMismatch { expected: x.p(), found: y.p() });
    }
    max_statistic_values(x.values(), y.values())
}

pub(crate) fn max_statistic_values(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<f64> {
    for (rows, name) in [(x.nrows(), "first"), (y.nrows(), "second")] {
        if rows < 2 {
            return Err(SledError::InvalidParameter(format!("{name} group needs at least 2 samples")));
        }
    }
    let gx = CrossMoments::new(x);
    let gy = CrossMoments::new(y);
    let p = x.ncols();
    let mut best = 0.0f64;
    for j in 0..p {
        for i in 0..=j {
            let (s1, t1) = gx.entry(i, j);
            let (s2, t2) = gy.entry(i, j);
            let denom = t1 / gx.n + t2 / gy.n;
            if denom <= 0.0 {
                return Err(SledError::DegenerateVariance { i, j });
            }
            let diff = s1 - s2;
            best = best.max(diff * diff / denom);
        }
    }
    Ok(best)
}

struct CrossMoments {
    /// Centered data, stored column-major so column slices are contiguous.
    centered: DMatrix<f64>,
    n: f64,
}

impl CrossMoments {
    fn new(values: &DMatrix<f64>) -> Self {
        Self { centered: center_columns(values), n: values.nrows() as f64 }
    }

    /// `(sigma_ij, theta_ij)` with `1/n` normalization for both.
    fn entry(&self, i: usize, j: usize) -> (f64, f64) {
        let a = self.centered.column(i);
        let b = self.centered.column(j);
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for (u, v) in a.iter().zip(b.iter()) {
            let w = u * v;
            sum += w;
            sum_sq += w * w;
        }
        let sigma = sum / self.n;
        let theta = (sum_sq / self.n - sigma * sigma).max(0.0);
        (sigma, theta)
    }
}
