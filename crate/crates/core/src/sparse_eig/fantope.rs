//! Fantope projection and selection.
//!
//! `F^1 = { H symmetric : 0 <= H <= I, tr(H) = 1 }` is the convex hull of
//! rank-one projectors `v v^T`. The relaxation `max tr(AH)` over
//! `H in F^1, ||H||_1 <= R` is solved with ADMM on the split `H = Z`:
//!
//! ```text
//! H <- P_F(Z - U + A / rho)
//! Z <- P_{||.||_1 <= R}(H + U)
//! U <- U + H - Z
//! ```

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{SparseEigenResult, SparsityBudget};
use crate::error::Result;
use crate::linalg::sorted_eigen;
use crate::matrix::SymmetricMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FpsOptions {
    pub rho: f64,
    /// Bound on both primal and dual residual Frobenius norms.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FpsOptions {
    fn default() -> Self {
        Self { rho: 1.0, tol: 1e-5, max_iter: 500 }
    }
}

#[derive(Debug, Clone)]
pub struct FpsSolution {
    /// `tr(A H)`.
    pub value: f64,
    /// Last Fantope iterate.
    pub h: SymmetricMatrix,
    pub iterations: usize,
    pub converged: bool,
}

impl FpsSolution {
    /// Leading eigenvector of `H` as the representative unit vector.
    pub fn into_result(self) -> SparseEigenResult {
        let eig = sorted_eigen(self.h.as_matrix());
        let mut v: DVector<f64> = eig.vectors.column(0).into_owned();
        // Fix the sign so the largest-magnitude coordinate is positive.
        let k = v.iamax();
        if v[k] < 0.0 {
            v.neg_mut();
        }
        SparseEigenResult::from_vector(self.value, v, self.iterations, self.converged)
    }
}

/// Frobenius-nearest point of `F^1` to `m`.
///
/// Eigenvalues `l_i` become `clamp(l_i - theta, 0, 1)` where `theta` makes
/// them sum to one. `theta` is bracketed by bisection, then solved exactly on
/// the linear piece it lands on.
pub fn fantope_projection(m: &SymmetricMatrix) -> SymmetricMatrix {
    let eig = sorted_eigen(m.as_matrix());
    let gamma = fantope_eigenvalues(eig.values.as_slice());
    let q = &eig.vectors;
    let mut scaled = q.clone();
    for (k, mut col) in scaled.column_iter_mut().enumerate() {
        col *= gamma[k];
    }
    SymmetricMatrix::mirror_upper(scaled * q.transpose())
}

fn fantope_eigenvalues(lambda: &[f64]) -> Vec<f64> {
    let clipped_sum = |theta: f64| lambda.iter().map(|l| (l - theta).clamp(0.0, 1.0)).sum::<f64>();
    let max = lambda.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = lambda.iter().copied().fold(f64::INFINITY, f64::min);
    // clipped_sum(lo) = p >= 1 and clipped_sum(hi) = 0.
    let (mut lo, mut hi) = (min - 1.0, max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if clipped_sum(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * (1.0 + max.abs().max(min.abs())) {
            break;
        }
    }
    let mut theta = 0.5 * (lo + hi);
    // Exact solve on the piece: ones + sum over interior (l - theta) = 1.
    let ones = lambda.iter().filter(|&&l| l - theta >= 1.0).count() as f64;
    let interior: Vec<f64> = lambda.iter().copied().filter(|&l| l - theta > 0.0 && l - theta < 1.0).collect();
    if !interior.is_empty() {
        let refined = (interior.iter().sum::<f64>() + ones - 1.0) / interior.len() as f64;
        if (refined - theta).abs() <= 1e-9 * (1.0 + theta.abs()) {
            theta = refined;
        }
    }
    lambda.iter().map(|l| (l - theta).clamp(0.0, 1.0)).collect()
}

/// Euclidean projection of `values` onto `{ x : ||x||_1 <= radius }`.
pub fn project_l1_ball(values: &mut [f64], radius: f64) {
    let l1: f64 = values.iter().map(|x| x.abs()).sum();
    if l1 <= radius {
        return;
    }
    let mut mags: Vec<f64> = values.iter().map(|x| x.abs()).collect();
    mags.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut tau = 0.0;
    for (k, &m) in mags.iter().enumerate() {
        cumulative += m;
        let candidate = (cumulative - radius) / (k + 1) as f64;
        if m > candidate {
            tau = candidate;
        } else {
            break;
        }
    }
    for x in values.iter_mut() {
        *x = super::soft::shrink(*x, tau);
    }
}

/// ADMM for `max tr(AH)` over `H in F^1, ||H||_1 <= R`.
pub fn fps_admm(a: &SymmetricMatrix, budget: &SparsityBudget, opts: &FpsOptions) -> Result<FpsSolution> {
    budget.check_dim(a.dim())?;
    let p = a.dim();
    let radius = budget.r();
    let rho = opts.rho;
    let scaled_a = a.as_matrix() / rho;

    let mut z = DMatrix::<f64>::zeros(p, p);
    let mut u = DMatrix::<f64>::zeros(p, p);
    let mut h = SymmetricMatrix::identity(p).scale(1.0 / p as f64);
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        iterations += 1;
        let target = SymmetricMatrix::mirror_upper(&z - &u + &scaled_a);
        h = fantope_projection(&target);

        let mut z_next = h.as_matrix() + &u;
        project_l1_ball(z_next.as_mut_slice(), radius);
        let z_next = SymmetricMatrix::mirror_upper(z_next).into_matrix();

        let primal = (h.as_matrix() - &z_next).norm();
        let dual = rho * (&z_next - &z).norm();
        u += h.as_matrix() - &z_next;
        z = z_next;
        if primal <= opts.tol && dual <= opts.tol {
            converged = true;
            break;
        }
    }
    let value = a.as_matrix().dot(h.as_matrix());
    Ok(FpsSolution { value, h, iterations, converged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sorted_eigen;
    use nalgebra::DVector;

    #[test]
    fn rank_one_projector_is_fixed() {
        let v = DVector::from_vec(vec![0.6, 0.0, -0.8]);
        let m = SymmetricMatrix::mirror_upper(&v * v.transpose());
        let h = fantope_projection(&m);
        assert!((h.as_matrix() - m.as_matrix()).norm() < 1e-12);
    }

    #[test]
    fn zero_projects_to_scaled_identity() {
        let h = fantope_projection(&SymmetricMatrix::zeros(4));
        assert!((h.as_matrix() - DMatrix::identity(4, 4) * 0.25).norm() < 1e-12);
    }

    #[test]
    fn projection_lands_in_the_fantope() {
        let m = SymmetricMatrix::from_fn(5, |i, j| ((i * 3 + j * 5) % 7) as f64 - 3.0);
        let h = fantope_projection(&m);
        assert!((h.trace() - 1.0).abs() < 1e-10);
        let e = sorted_eigen(h.as_matrix());
        assert!(e.values.iter().all(|&l| (-1e-10..=1.0 + 1e-10).contains(&l)));
    }

    #[test]
    fn l1_ball_projection() {
        let mut x = vec![3.0, -1.0, 0.5];
        project_l1_ball(&mut x, 2.0);
        assert_eq!(x, vec![2.0, 0.0, 0.0]);
        let mut y = vec![1.0, -1.0];
        project_l1_ball(&mut y, 5.0);
        assert_eq!(y, vec![1.0, -1.0]);
        let mut w = vec![1.0, 1.0, 1.0];
        project_l1_ball(&mut w, 1.5);
        assert!(w.iter().all(|&v| (v - 0.5).abs() < 1e-15));
    }

    #[test]
    fn vacuous_budget_gives_top_eigenvalue() {
        let a = SymmetricMatrix::from_diagonal(&[3.0, 2.0, 1.0]);
        let b = SparsityBudget::new(1.0, 3).unwrap();
        let opts = FpsOptions { tol: 1e-8, max_iter: 5000, ..Default::default() };
        let sol = fps_admm(&a, &b, &opts).unwrap();
        assert!((sol.value - 3.0).abs() < 1e-4, "value {}", sol.value);
    }

    #[test]
    fn zero_matrix_has_zero_value() {
        let b = SparsityBudget::new(0.8, 4).unwrap();
        let sol = fps_admm(&SymmetricMatrix::zeros(4), &b, &FpsOptions::default()).unwrap();
        assert_eq!(sol.value, 0.0);
        assert!(sol.converged);
    }
}
