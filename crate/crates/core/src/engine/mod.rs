//! The two-sample test: statistics, permutation calibration and feature ranking.

pub mod relationship;

mod permutation;
mod ranking;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SledError};
use crate::matrix::SymmetricMatrix;
use crate::sparse_eig::{Solver, SparseEigenResult, SparsityBudget};

pub use permutation::{p_value, permutation_test, PValueRule, PermutationTestResult, TestConfig};
pub use ranking::{rank_features, FeatureRanking, DEFAULT_CUMULATIVE_CUT};
pub use relationship::{differential_matrix, relationship_matrix, Centering, RelationshipKind};

/// Test statistic computed on each (pseudo-)grouping.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Sparse leading eigenvalue of the differential matrix.
    #[default]
    Sled,
    /// Squared Frobenius norm of the differential matrix.
    Frobenius,
    /// Normalized largest entrywise covariance difference.
    Max,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Sled => "sled",
            Method::Frobenius => "frobenius",
            Method::Max => "max",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = SledError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sled" => Ok(Method::Sled),
            "frobenius" => Ok(Method::Frobenius),
            "max" => Ok(Method::Max),
            other => Err(SledError::InvalidParameter(format!("unknown method {other:?}"))),
        }
    }
}

/// `T_R = max(|lambda(D)|, |lambda(-D)|)` with the winning solve.
///
/// Ties go to the solve on `D` (`negated = false`).
pub fn sled_statistic(
    d: &SymmetricMatrix,
    budget: &SparsityBudget,
    solver: &Solver,
) -> Result<(f64, SparseEigenResult)> {
    let plus = solver.solve(d, budget)?;
    let mut minus = solver.solve(&d.neg(), budget)?;
    minus.negated = true;
    if minus.value.abs() > plus.value.abs() {
        Ok((minus.value.abs(), minus))
    } else {
        Ok((plus.value.abs(), plus))
    }
}
