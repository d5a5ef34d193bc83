//! Two-sample testing of high-dimensional covariance matrices through the
//! sparse leading eigenvalue of their difference.
//!
//! The pieces, bottom up:
//!
//! * [`sparse_eig`]: sparse leading-eigenvalue solvers.
//! * [`engine`]: relationship and differential matrices, the test
//!   statistic, the permutation test and leverage ranking.
//! * [`competitors`]: Frobenius and max-entry baselines.
//! * [`simgen`]: simulation scenarios and power studies.
//! * [`io`]: matrix files and result documents.

pub mod competitors;
pub mod engine;
pub mod error;
pub mod io;
pub mod linalg;
pub mod matrix;
pub mod rng;
pub mod simgen;
pub mod sparse_eig;

pub use error::{Result, SledError};
pub use matrix::{DataMatrix, SymmetricMatrix};
