//! Sparse leading eigenvalues of symmetric (possibly indefinite) matrices.
//!
//! The target is the `R`-sparse leading eigenvalue
//! `max { v^T A v : ||v||_2 = 1, ||v||_0 <= R }`. Three solvers are provided:
//!
//! * [`constrained_pmd`]: the L1 relaxation `||v||_1 <= sqrt(R)` solved by
//!   alternating soft-thresholded power steps on a diagonally shifted,
//!   positive semidefinite copy of `A`. Fast, nonconvex, the default.
//! * [`fps_admm`]: the convex Fantope relaxation
//!   `max tr(AH), H in F^1, ||H||_1 <= R`, solved by two-block ADMM.
//! * [`sparse_eig_exact`]: exhaustive search over supports, for small
//!   instances and as a test oracle.

mod exact;
mod fantope;
mod pmd;
mod soft;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SledError};
use crate::matrix::SymmetricMatrix;

pub use exact::{sparse_eig_exact, ExactSolution, MAX_EXACT_DIM, MAX_EXACT_SUPPORTS};
pub use fantope::{fantope_projection, fps_admm, project_l1_ball, FpsOptions, FpsSolution};
pub use pmd::{constrained_pmd, pmd_rank_one, psd_shift, PmdOptions, PmdSolution};
pub use soft::{l1_constrained_direction, soft_threshold};

/// L1 budget `sqrt(R) = c * sqrt(p)` for unit vectors in `R^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SparsityBudget {
    c: f64,
    p: usize,
    sqrt_r: f64,
}

impl SparsityBudget {
    /// Budget with `sqrt(R) = c * sqrt(p)`. Requires `c` in `(0, 1]` and
    /// `sqrt(R) >= 1`; below 1 no unit vector is feasible.
    pub fn new(c: f64, p: usize) -> Result<Self> {
        if p == 0 {
            return Err(SledError::InvalidBudget("p must be positive".into()));
        }
        if !(c > 0.0 && c <= 1.0) {
            return Err(SledError::InvalidBudget(format!("c = {c} is outside (0, 1]")));
        }
        let sqrt_r = c * (p as f64).sqrt();
        if sqrt_r < 1.0 - 1e-12 {
            return Err(SledError::InvalidBudget(format!(
                "c * sqrt(p) = {sqrt_r:.4} < 1 (c = {c}, p = {p}); use c >= {:.4}",
                1.0 / (p as f64).sqrt()
            )));
        }
        Ok(Self { c, p, sqrt_r: sqrt_r.max(1.0) })
    }

    /// Like [`SparsityBudget::new`], but raises `sqrt(R)` to 1 when `c * sqrt(p) < 1`.
    /// The stored `c` is then the effective value `1 / sqrt(p)`.
    pub fn clamped(c: f64, p: usize) -> Result<Self> {
        if p == 0 {
            return Err(SledError::InvalidBudget("p must be positive".into()));
        }
        if !(c > 0.0 && c <= 1.0) {
            return Err(SledError::InvalidBudget(format!("c = {c} is outside (0, 1]")));
        }
        let floor = 1.0 / (p as f64).sqrt();
        Self::new(c.max(floor), p)
    }

    /// Budget given directly as `sqrt(R)`.
    pub fn from_sqrt_r(sqrt_r: f64, p: usize) -> Result<Self> {
        Self::new(sqrt_r / (p as f64).sqrt(), p)
    }

    /// Budget given as `R`.
    pub fn from_r(r: f64, p: usize) -> Result<Self> {
        Self::from_sqrt_r(r.sqrt(), p)
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn sqrt_r(&self) -> f64 {
        self.sqrt_r
    }

    pub fn r(&self) -> f64 {
        self.sqrt_r * self.sqrt_r
    }

    /// `floor(R)`, the matching L0 budget.
    pub fn r_floor(&self) -> usize {
        ((self.r() + 1e-9).floor() as usize).clamp(1, self.p)
    }

    pub(crate) fn check_dim(&self, p: usize) -> Result<()> {
        if self.p != p {
            return Err(SledError::DimensionMismatch { expected: self.p, found: p });
        }
        Ok(())
    }
}

/// Output of a sparse leading-eigenvalue solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseEigenResult {
    /// Achieved objective `v^T A v` (or `tr(AH)` for the Fantope solver).
    pub value: f64,
    /// Unit vector attaining `value`.
    pub vector: DVector<f64>,
    /// Whether the solution was computed on `-A`.
    pub negated: bool,
    /// Squared coordinates of `vector`.
    pub leverage: DVector<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl SparseEigenResult {
    pub(crate) fn from_vector(value: f64, vector: DVector<f64>, iterations: usize, converged: bool) -> Self {
        let leverage = vector.map(|x| x * x);
        Self { value, vector, negated: false, leverage, iterations, converged }
    }

    pub fn ensure_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(SledError::NonConvergence { iterations: self.iterations })
        }
    }
}

/// Which sparse eigenvalue solver to use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum Solver {
    Pmd(PmdOptions),
    Fps(FpsOptions),
    /// Exhaustive support search at `R = floor(budget R)`.
    Exact,
}

impl Default for Solver {
    fn default() -> Self {
        Solver::Pmd(PmdOptions::default())
    }
}

impl Solver {
    pub fn solve(&self, a: &SymmetricMatrix, budget: &SparsityBudget) -> Result<SparseEigenResult> {
        budget.check_dim(a.dim())?;
        match self {
            Solver::Pmd(opts) => constrained_pmd(a, budget, opts),
            Solver::Fps(opts) => {
                let sol = fps_admm(a, budget, opts)?;
                Ok(sol.into_result())
            }
            Solver::Exact => {
                let sol = sparse_eig_exact(a, budget.r_floor())?;
                Ok(SparseEigenResult::from_vector(sol.value, sol.vector, 1, true))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_relations() {
        let b = SparsityBudget::new(0.5, 16).unwrap();
        assert!((b.sqrt_r() - 2.0).abs() < 1e-12);
        assert!((b.r() - 4.0).abs() < 1e-12);
        assert_eq!(b.r_floor(), 4);
        assert!((b.sqrt_r() * b.sqrt_r() - b.r()).abs() < 1e-12);
    }

    #[test]
    fn budget_rejects_infeasible() {
        assert!(SparsityBudget::new(0.1, 50).is_err());
        assert!(SparsityBudget::new(0.0, 50).is_err());
        assert!(SparsityBudget::new(1.5, 50).is_err());
        let b = SparsityBudget::clamped(0.1, 50).unwrap();
        assert!((b.sqrt_r() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn full_budget_is_sqrt_p() {
        let b = SparsityBudget::new(1.0, 9).unwrap();
        assert!((b.sqrt_r() - 3.0).abs() < 1e-12);
    }
}
