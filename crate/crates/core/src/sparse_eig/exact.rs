use nalgebra::DVector;

use crate::error::{Result, SledError};
use crate::linalg::sorted_eigen;
use crate::matrix::SymmetricMatrix;

pub const MAX_EXACT_DIM: usize = 20;
pub const MAX_EXACT_SUPPORTS: u128 = 200_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ExactSolution {
    pub value: f64,
    /// Sorted support indices.
    pub support: Vec<usize>,
    /// Unit vector on `support`.
    pub vector: DVector<f64>,
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// `max { v^T A v : ||v||_2 = 1, ||v||_0 <= r }` by exhaustive search.
///
/// By eigenvalue interlacing a principal submatrix never has a larger top
/// eigenvalue than a principal submatrix containing it, so only supports of
/// size exactly `min(r, p)` are scanned. Supports are visited in
/// lexicographic order; the first maximizer wins.
pub fn sparse_eig_exact(a: &SymmetricMatrix, r: usize) -> Result<ExactSolution> {
    let p = a.dim();
    if r == 0 {
        return Err(SledError::InvalidParameter("support size must be positive".into()));
    }
    let k = r.min(p);
    let supports = binomial(p, k);
    if p > MAX_EXACT_DIM || supports > MAX_EXACT_SUPPORTS {
        return Err(SledError::InstanceTooLarge { p, r, supports });
    }

    let mut idx: Vec<usize> = (0..k).collect();
    let mut best: Option<ExactSolution> = None;
    loop {
        let eig = sorted_eigen(&a.principal_submatrix(&idx));
        let value = eig.values[0];
        if best.as_ref().is_none_or(|b| value > b.value) {
            let mut vector = DVector::zeros(p);
            for (slot, &i) in idx.iter().enumerate() {
                vector[i] = eig.vectors[(slot, 0)];
            }
            best = Some(ExactSolution { value, support: idx.clone(), vector });
        }
        if !next_combination(&mut idx, p) {
            break;
        }
    }
    Ok(best.expect("at least one support"))
}

fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in (i + 1)..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
