use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SledError};
use crate::matrix::{DataMatrix, SymmetricMatrix};

/// Which feature-by-feature matrix is compared between groups.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum RelationshipKind {
    /// Mean-centered second moments with `1/n` normalization.
    Covariance,
    /// Pearson correlations.
    Correlation,
    /// Weighted co-expression adjacency `|r_ij|^beta`, zero diagonal.
    Adjacency { beta: f64 },
}

impl RelationshipKind {
    pub fn validate(&self) -> Result<()> {
        if let RelationshipKind::Adjacency { beta } = self {
            if !(*beta > 0.0 && beta.is_finite()) {
                return Err(SledError::InvalidParameter(format!("adjacency beta must be positive, got {beta}")));
            }
        }
        Ok(())
    }
}

/// Where column means come from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Centering {
    /// Each group (or pseudo-group) is centered at its own means.
    #[default]
    PerGroup,
    /// All samples are centered once at the pooled means.
    Global,
}

/// Relationship matrix of one group, centered at its own column means.
pub fn relationship_matrix(x: &DataMatrix, kind: RelationshipKind) -> Result<SymmetricMatrix> {
    kind.validate()?;
    group_relationship(x.values(), kind, true)
}

/// `relationship_matrix(y) - relationship_matrix(x)`.
pub fn differential_matrix(x: &DataMatrix, y: &DataMatrix, kind: RelationshipKind) -> Result<SymmetricMatrix> {
    if x.p() != y.p() {
        return Err(SledError::DimensionMismatch { expected: x.p(), found: y.p() });
    }
    Ok(relationship_matrix(y, kind)?.sub(&relationship_matrix(x, kind)?))
}

/// `values` is `n x p`. With `center = false` the rows are taken as already
/// centered.
pub(crate) fn group_relationship(
    values: &DMatrix<f64>,
    kind: RelationshipKind,
    center: bool,
) -> Result<SymmetricMatrix> {
    let n = values.nrows();
    if n < 2 {
        return Err(SledError::InvalidParameter(format!("need at least 2 samples per group, got {n}")));
    }
    if !matches!(kind, RelationshipKind::Covariance) {
        if let Some(j) = constant_column(values) {
            return Err(SledError::DegenerateFeature(j));
        }
    }

    let centered;
    let xc = if center {
        centered = center_columns(values);
        &centered
    } else {
        values
    };
    let mut cov = xc.tr_mul(xc);
    cov /= n as f64;
    let cov = SymmetricMatrix::mirror_upper(cov);

    match kind {
        RelationshipKind::Covariance => Ok(cov),
        RelationshipKind::Correlation => correlation_from_covariance(&cov),
        RelationshipKind::Adjacency { beta } => {
            let r = correlation_from_covariance(&cov)?;
            let p = r.dim();
            Ok(SymmetricMatrix::from_fn(p, |i, j| if i == j { 0.0 } else { r.get(i, j).abs().powf(beta) }))
        }
    }
}

fn correlation_from_covariance(cov: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    let p = cov.dim();
    let mut inv_sd = Vec::with_capacity(p);
    for j in 0..p {
        let var = cov.get(j, j);
        if var <= 0.0 {
            return Err(SledError::DegenerateFeature(j));
        }
        inv_sd.push(1.0 / var.sqrt());
    }
    Ok(SymmetricMatrix::from_fn(
        p,
        |i, j| {
            if i == j {
                1.0
            } else {
                (cov.get(i, j) * inv_sd[i] * inv_sd[j]).clamp(-1.0, 1.0)
            }
        },
    ))
}

pub(crate) fn center_columns(values: &DMatrix<f64>) -> DMatrix<f64> {
    let n = values.nrows() as f64;
    let mut out = values.clone();
    for mut col in out.column_iter_mut() {
        let mean = col.sum() / n;
        col.add_scalar_mut(-mean);
    }
    out
}

fn constant_column(values: &DMatrix<f64>) -> Option<usize> {
    values.column_iter().position(|col| {
        let first = col[0];
        col.iter().all(|&v| v == first)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(rows: &[&[f64]]) -> DataMatrix {
        DataMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn covariance_hand_computed() {
        let x = data(&[&[1.0, 2.0], &[2.0, 4.0], &[3.0, 6.0], &[4.0, 8.0]]);
        let c = relationship_matrix(&x, RelationshipKind::Covariance).unwrap();
        let expected = [[1.25, 2.5], [2.5, 5.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((c.get(i, j) - expected[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn identical_columns_correlate_perfectly() {
        let x = data(&[&[1.0, 1.0, 0.0], &[2.0, 2.0, 1.0], &[5.0, 5.0, 0.5]]);
        let r = relationship_matrix(&x, RelationshipKind::Correlation).unwrap();
        assert_eq!(r.get(0, 1), 1.0);
        assert_eq!(r.get(1, 1), 1.0);
    }

    #[test]
    fn adjacency_is_powered_absolute_correlation() {
        let x = data(&[&[1.0, 0.3, -2.0], &[2.0, -1.0, 0.5], &[0.0, 0.7, 1.5], &[4.0, 1.1, -0.2]]);
        let r = relationship_matrix(&x, RelationshipKind::Correlation).unwrap();
        let a = relationship_matrix(&x, RelationshipKind::Adjacency { beta: 6.5 }).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 0.0 } else { r.get(i, j).abs().powf(6.5) };
                assert!((a.get(i, j) - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_feature_is_degenerate_for_correlation_only() {
        let x = data(&[&[1.0, 0.1], &[2.0, 0.1], &[3.0, 0.1]]);
        assert!(matches!(relationship_matrix(&x, RelationshipKind::Correlation), Err(SledError::DegenerateFeature(1))));
        assert!(relationship_matrix(&x, RelationshipKind::Covariance).is_ok());
        assert!(relationship_matrix(&x, RelationshipKind::Adjacency { beta: -1.0 }).is_err());
    }

    #[test]
    fn differential_basics() {
        let x = data(&[&[1.0, 2.0], &[2.0, 1.0], &[0.0, 0.5]]);
        let y = data(&[&[3.0, 2.0], &[1.0, 1.0], &[0.0, -1.0], &[2.0, 2.0]]);
        let k = RelationshipKind::Covariance;
        assert_eq!(differential_matrix(&x, &x, k).unwrap(), SymmetricMatrix::zeros(2));
        let d = differential_matrix(&x, &y, k).unwrap();
        assert_eq!(differential_matrix(&y, &x, k).unwrap(), d.neg());
        let manual = relationship_matrix(&y, k).unwrap().sub(&relationship_matrix(&x, k).unwrap());
        assert_eq!(d, manual);
        let z = data(&[&[1.0, 2.0, 3.0], &[0.0, 1.0, 2.0]]);
        assert!(matches!(differential_matrix(&x, &z, k), Err(SledError::DimensionMismatch { .. })));
    }
}
