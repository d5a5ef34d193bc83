//! Matrix newtypes shared by every module.
//!
//! [`SymmetricMatrix`] holds covariances, correlations, adjacencies and
//! differential matrices. Symmetry is exact: constructors either check it
//! or mirror one triangle. [`DataMatrix`] is a samples-by-features table.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SledError};

/// A real symmetric `p x p` matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    inner: DMatrix<f64>,
}

impl SymmetricMatrix {
    /// Checks squareness, finiteness and symmetry to `1e-12` (relative to
    /// the largest entry), then mirrors the upper triangle so symmetry holds
    /// bit-for-bit.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = m.shape();
        if rows != cols {
            return Err(SledError::NotSquare { rows, cols });
        }
        if rows == 0 {
            return Err(SledError::InvalidParameter("matrix must be non-empty".into()));
        }
        for j in 0..cols {
            for i in 0..rows {
                if !m[(i, j)].is_finite() {
                    return Err(SledError::NonFinite { row: i, col: j });
                }
            }
        }
        let scale = m.amax().max(1.0);
        for j in 0..cols {
            for i in 0..j {
                let gap = (m[(i, j)] - m[(j, i)]).abs();
                if gap > 1e-12 * scale {
                    return Err(SledError::NotSymmetric { i, j, gap });
                }
            }
        }
        Ok(Self::mirror_upper(m))
    }

    /// Builds from an arbitrary square matrix by copying its upper triangle
    /// onto the lower one. No symmetry check.
    pub fn mirror_upper(mut m: DMatrix<f64>) -> Self {
        let p = m.nrows();
        assert_eq!(p, m.ncols(), "mirror_upper needs a square matrix");
        for j in 0..p {
            for i in (j + 1)..p {
                m[(i, j)] = m[(j, i)];
            }
        }
        Self { inner: m }
    }

    pub fn from_fn(p: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        Self::mirror_upper(DMatrix::from_fn(p, p, |i, j| if i <= j { f(i, j) } else { 0.0 }))
    }

    pub fn zeros(p: usize) -> Self {
        Self { inner: DMatrix::zeros(p, p) }
    }

    pub fn identity(p: usize) -> Self {
        Self { inner: DMatrix::identity(p, p) }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self { inner: DMatrix::from_diagonal(&DVector::from_column_slice(diag)) }
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.inner
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.inner
    }

    /// Largest absolute entry, `max_ij |a_ij|`.
    pub fn max_abs(&self) -> f64 {
        self.inner.amax()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.norm()
    }

    pub fn trace(&self) -> f64 {
        self.inner.trace()
    }

    pub fn neg(&self) -> Self {
        Self { inner: -&self.inner }
    }

    /// `self - other`. Panics on dimension mismatch.
    pub fn sub(&self, other: &Self) -> Self {
        Self { inner: &self.inner - &other.inner }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { inner: &self.inner + &other.inner }
    }

    pub fn scale(&self, t: f64) -> Self {
        Self { inner: &self.inner * t }
    }

    /// `self + t * I`.
    pub fn shift_diagonal(&self, t: f64) -> Self {
        let mut inner = self.inner.clone();
        for i in 0..inner.nrows() {
            inner[(i, i)] += t;
        }
        Self { inner }
    }

    /// Quadratic form `v^T A v`.
    pub fn quadratic_form(&self, v: &DVector<f64>) -> f64 {
        v.dot(&(&self.inner * v))
    }

    /// Simultaneous row/column permutation: `out[i][j] = self[perm[i]][perm[j]]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let p = self.dim();
        assert_eq!(perm.len(), p);
        Self { inner: DMatrix::from_fn(p, p, |i, j| self.inner[(perm[i], perm[j])]) }
    }

    /// Principal submatrix on `idx`.
    pub fn principal_submatrix(&self, idx: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(idx.len(), idx.len(), |a, b| self.inner[(idx[a], idx[b])])
    }
}

/// An `n x p` sample-by-feature matrix of finite reals.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: DMatrix<f64>,
    feature_names: Option<Vec<String>>,
}

impl DataMatrix {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(SledError::InvalidParameter("data matrix must be non-empty".into()));
        }
        for j in 0..values.ncols() {
            for i in 0..values.nrows() {
                if !values[(i, j)].is_finite() {
                    return Err(SledError::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(Self { values, feature_names: None })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != p) {
            return Err(SledError::DimensionMismatch { expected: p, found: bad.len() });
        }
        Self::new(DMatrix::from_fn(n, p, |i, j| rows[i][j]))
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.p() {
            return Err(SledError::DimensionMismatch { expected: self.p(), found: names.len() });
        }
        let mut seen = std::collections::HashSet::with_capacity(names.len());
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(SledError::InvalidParameter(format!("duplicate feature name {name:?}")));
            }
        }
        self.feature_names = Some(names);
        Ok(self)
    }

    /// Number of samples.
    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    /// Number of features.
    pub fn p(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    /// Name of feature `j`, falling back to its index.
    pub fn feature_label(&self, j: usize) -> String {
        match &self.feature_names {
            Some(names) => names[j].clone(),
            None => j.to_string(),
        }
    }

    pub fn transpose(&self) -> Result<Self> {
        Self::new(self.values.transpose())
    }

    /// New matrix holding `rows` in the given order. Names are kept.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let values = self.values.select_rows(rows.iter());
        Self { values, feature_names: self.feature_names.clone() }
    }

    /// New matrix holding feature columns `cols` in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let values = self.values.select_columns(cols.iter());
        let feature_names = self.feature_names.as_ref().map(|names| cols.iter().map(|&c| names[c].clone()).collect());
        Self { values, feature_names }
    }

    /// Rows of `self` followed by rows of `other`. Feature names come from `self`.
    pub fn stack(&self, other: &Self) -> Result<Self> {
        if self.p() != other.p() {
            return Err(SledError::DimensionMismatch { expected: self.p(), found: other.p() });
        }
        let (n, m, p) = (self.n(), other.n(), self.p());
        let values =
            DMatrix::from_fn(n + m, p, |i, j| if i < n { self.values[(i, j)] } else { other.values[(i - n, j)] });
        Ok(Self { values, feature_names: self.feature_names.clone() })
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self { values: &self.values * t, feature_names: self.feature_names.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn new_rejects_asymmetric_and_non_finite() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.5, 1.0]);
        assert!(matches!(SymmetricMatrix::new(m), Err(SledError::NotSymmetric { .. })));
        let m = DMatrix::from_row_slice(2, 2, &[1.0, f64::NAN, f64::NAN, 1.0]);
        assert!(matches!(SymmetricMatrix::new(m), Err(SledError::NonFinite { .. })));
        let m = DMatrix::<f64>::zeros(2, 3);
        assert!(matches!(SymmetricMatrix::new(m), Err(SledError::NotSquare { .. })));
    }

    #[test]
    fn mirror_upper_is_exactly_symmetric() {
        let m = DMatrix::from_fn(4, 4, |i, j| (i * 7 + j * 3) as f64 * 0.1);
        let s = SymmetricMatrix::mirror_upper(m);
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(s.get(i, j), s.get(j, i));
            }
        }
    }

    #[test]
    fn feature_names_must_be_unique_and_sized() {
        let x = DataMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert!(x.clone().with_feature_names(vec!["a".into()]).is_err());
        assert!(x.clone().with_feature_names(vec!["a".into(), "a".into()]).is_err());
        let x = x.with_feature_names(vec!["a".into(), "b".into()]).unwrap();
        assert_eq!(x.feature_label(1), "b");
    }

    #[test]
    fn stack_and_select() {
        let x = DataMatrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        let y = DataMatrix::from_rows(&[vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        let z = x.stack(&y).unwrap();
        assert_eq!(z.n(), 3);
        assert_eq!(z.select_rows(&[2, 0]).values()[(0, 1)], 6.0);
        assert_eq!(z.select_columns(&[1]).values()[(1, 0)], 4.0);
    }
}
