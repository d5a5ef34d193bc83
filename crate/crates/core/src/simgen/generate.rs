use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{BaseKind, DiffKind, Noise};
use crate::error::{Result, SledError};
use crate::linalg::{min_eigenvalue, symmetric_sqrt};
use crate::matrix::{DataMatrix, SymmetricMatrix};

const BLOCK: usize = 10;
const BLOCK_CORRELATION: f64 = 0.55;
const BERNOULLI_RATE: f64 = 0.05;
const PD_CUSHION: f64 = 0.05;

/// `Unif(0.5, 2.5)` diagonal scales.
pub fn draw_scales<R: Rng + ?Sized>(p: usize, rng: &mut R) -> Vec<f64> {
    (0..p).map(|_| rng.gen_range(0.5..2.5)).collect()
}

/// `Lambda^{1/2} Delta Lambda^{1/2}` with freshly drawn scales.
pub fn base_covariance<R: Rng + ?Sized>(kind: BaseKind, p: usize, rng: &mut R) -> Result<SymmetricMatrix> {
    let scales = draw_scales(p, rng);
    base_covariance_with_scales(kind, &scales, rng)
}

/// `Lambda^{1/2} Delta Lambda^{1/2}` for the given diagonal `scales`.
/// `rng` is only consumed by the noisy-diagonal structure.
pub fn base_covariance_with_scales<R: Rng + ?Sized>(
    kind: BaseKind,
    scales: &[f64],
    rng: &mut R,
) -> Result<SymmetricMatrix> {
    let p = scales.len();
    if p == 0 {
        return Err(SledError::InvalidParameter("p must be positive".into()));
    }
    let delta = match kind {
        BaseKind::NoisyDiagonal => {
            let mut m = DMatrix::identity(p, p);
            for j in 0..p {
                for i in 0..j {
                    if rng.gen_bool(BERNOULLI_RATE) {
                        m[(i, j)] = 1.0;
                    }
                }
            }
            SymmetricMatrix::mirror_upper(m)
        }
        BaseKind::BlockDiagonal => {
            if p < BLOCK {
                return Err(SledError::InvalidParameter(format!("block-diagonal base needs p >= {BLOCK}, got {p}")));
            }
            let blocks = p / BLOCK;
            SymmetricMatrix::from_fn(p, |i, j| {
                if i == j {
                    1.0
                } else if i / BLOCK == j / BLOCK && i / BLOCK < blocks {
                    BLOCK_CORRELATION
                } else {
                    0.0
                }
            })
        }
        BaseKind::ExpDecay => SymmetricMatrix::from_fn(p, |i, j| 0.5f64.powi(j.abs_diff(i) as i32)),
    };
    let root: Vec<f64> = scales.iter().map(|s| s.sqrt()).collect();
    Ok(SymmetricMatrix::from_fn(p, |i, j| root[i] * delta.get(i, j) * root[j]))
}

/// Signal level `factor * sqrt(max_j Sigma*_jj * ln p)`.
pub fn signal_level(sigma_star: &SymmetricMatrix, factor: f64) -> f64 {
    let p = sigma_star.dim();
    let max_diag = (0..p).map(|j| sigma_star.get(j, j)).fold(f64::NEG_INFINITY, f64::max);
    factor * (max_diag * (p as f64).ln()).sqrt()
}

/// Differential matrix for `sigma_star`.
///
/// * Sparse block: the leading `s = floor(0.1 p)` features, upper triangle
///   and diagonal i.i.d. `Unif(d/2, 2d)` mirrored, `d = 0.5 sqrt(max diag * ln p)`.
/// * Soft-sparse spiked: `d v v^T` with `d = 4 sqrt(max diag * ln p)`;
///   `v` has a uniformly sampled support of size `floor(0.2 p)` whose first
///   `floor(0.1 p)` entries are `N(1, 0.1^2)` and the rest `N(0.1, 0.1^2)`,
///   then is normalized.
pub fn differential<R: Rng + ?Sized>(
    kind: DiffKind,
    sigma_star: &SymmetricMatrix,
    rng: &mut R,
) -> Result<SymmetricMatrix> {
    let p = sigma_star.dim();
    if p < 10 {
        return Err(SledError::InvalidParameter(format!("differential matrices need p >= 10, got {p}")));
    }
    match kind {
        DiffKind::SparseBlock => {
            let d = signal_level(sigma_star, 0.5);
            let s = p / 10;
            let mut m = DMatrix::zeros(p, p);
            for j in 0..s {
                for i in 0..=j {
                    m[(i, j)] = rng.gen_range(d / 2.0..2.0 * d);
                }
            }
            Ok(SymmetricMatrix::mirror_upper(m))
        }
        DiffKind::SoftSparseSpiked => {
            let d = signal_level(sigma_star, 4.0);
            let strong = p / 10;
            let support = rand::seq::index::sample(rng, p, p / 5).into_vec();
            let high = Normal::new(1.0, 0.1).expect("valid normal");
            let low = Normal::new(0.1, 0.1).expect("valid normal");
            let mut v = DVector::<f64>::zeros(p);
            for (k, &i) in support.iter().enumerate() {
                v[i] = if k < strong { high.sample(rng) } else { low.sample(rng) };
            }
            let v = &v / v.norm();
            Ok(SymmetricMatrix::mirror_upper(&v * v.transpose() * d))
        }
    }
}

/// How the diagonal cushion `delta` is computed from
/// `l = min(lambda_min(Sigma*), lambda_min(Sigma* + D))`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PdShift {
    /// `|l| + 0.05`, applied even when `l > 0`.
    #[default]
    Literal,
    /// `max(0, -l) + 0.05`.
    IfNeeded,
}

#[derive(Debug, Clone)]
pub struct ScenarioMatrices {
    pub sigma1: SymmetricMatrix,
    pub sigma2: SymmetricMatrix,
    pub d: SymmetricMatrix,
    pub sqrt1: DMatrix<f64>,
    pub sqrt2: DMatrix<f64>,
    pub delta: f64,
}

/// `Sigma_1 = Sigma* + delta I`, `Sigma_2 = Sigma* + D + delta I`, plus
/// symmetric square roots.
pub fn enforce_pd(sigma_star: &SymmetricMatrix, d: &SymmetricMatrix, shift: PdShift) -> Result<ScenarioMatrices> {
    if sigma_star.dim() != d.dim() {
        return Err(SledError::DimensionMismatch { expected: sigma_star.dim(), found: d.dim() });
    }
    let perturbed = sigma_star.add(d);
    let l = min_eigenvalue(sigma_star.as_matrix()).min(min_eigenvalue(perturbed.as_matrix()));
    let delta = match shift {
        PdShift::Literal => l.abs(),
        PdShift::IfNeeded => (-l).max(0.0),
    } + PD_CUSHION;
    let sigma1 = sigma_star.shift_diagonal(delta);
    let sigma2 = perturbed.shift_diagonal(delta);
    let sqrt1 = symmetric_sqrt(sigma1.as_matrix());
    let sqrt2 = symmetric_sqrt(sigma2.as_matrix());
    Ok(ScenarioMatrices { sigma1, sigma2, d: d.clone(), sqrt1, sqrt2, delta })
}

/// `n` rows `sqrt * z` with i.i.d. `noise` entries in `z`, drawn row by row.
pub fn sample<R: Rng + ?Sized>(sqrt: &DMatrix<f64>, n: usize, noise: Noise, rng: &mut R) -> Result<DataMatrix> {
    let p = sqrt.nrows();
    let sampler = noise.sampler();
    let mut z = DMatrix::zeros(n, p);
    for i in 0..n {
        for j in 0..p {
            z[(i, j)] = sampler.draw(rng);
        }
    }
    // Rows of Z S^T; S is symmetric.
    DataMatrix::new(z * sqrt.transpose())
}
