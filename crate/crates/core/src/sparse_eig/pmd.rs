//! Rank-one penalized matrix decomposition and its constrained variant.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::soft::l1_constrained_direction;
use super::{SparseEigenResult, SparsityBudget};
use crate::error::Result;
use crate::matrix::SymmetricMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PmdOptions {
    /// Relative tolerance on the change of the objective between alternations.
    pub tol: f64,
    pub max_iter: usize,
    /// Power iterations used for the warm start.
    pub power_iter: usize,
}

impl Default for PmdOptions {
    fn default() -> Self {
        Self { tol: 1e-6, max_iter: 100, power_iter: 200 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PmdSolution {
    pub u: DVector<f64>,
    pub v: DVector<f64>,
    /// `u^T A v`.
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Diagonal shift `d = max(0, -g)` with `g = min_i (a_ii - sum_{j != i} |a_ij|)`,
/// the Gershgorin lower bound on the spectrum. `A + dI` is positive semidefinite.
pub fn psd_shift(a: &SymmetricMatrix) -> f64 {
    (-gershgorin_lower_bound(a)).max(0.0)
}

pub(crate) fn gershgorin_lower_bound(a: &SymmetricMatrix) -> f64 {
    let m = a.as_matrix();
    (0..a.dim())
        .map(|i| {
            let col = m.column(i);
            let off: f64 = col.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, x)| x.abs()).sum();
            m[(i, i)] - off
        })
        .fold(f64::INFINITY, f64::min)
}

/// Alternating maximization of `u^T A v` subject to `||u||_2, ||v||_2 <= 1`
/// and `||u||_1, ||v||_1 <= sqrt(R)`. `A` should be positive semidefinite,
/// in which case the iterates satisfy `u = v` at the optimum.
///
/// Starts from the leading eigenvector estimated by power iteration from the
/// all-ones vector. Stops when `|f_k - f_{k-1}| <= tol (1 + |f_k|)`; if
/// `max_iter` alternations pass first the last iterate comes back with
/// `converged = false`.
pub fn pmd_rank_one(a: &SymmetricMatrix, budget: &SparsityBudget, opts: &PmdOptions) -> Result<PmdSolution> {
    budget.check_dim(a.dim())?;
    Ok(pmd_from(a, budget.sqrt_r(), opts, power_start(a, opts.power_iter)))
}

fn pmd_from(a: &SymmetricMatrix, sqrt_r: f64, opts: &PmdOptions, start: DVector<f64>) -> PmdSolution {
    let m = a.as_matrix();
    let mut v = start;
    let mut u = l1_constrained_direction(&(m * &v), sqrt_r);
    let mut value = f64::NEG_INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        iterations += 1;
        v = l1_constrained_direction(&(m.tr_mul(&u)), sqrt_r);
        let av = m * &v;
        let next = u.dot(&av);
        u = l1_constrained_direction(&av, sqrt_r);
        let done = (next - value).abs() <= opts.tol * (1.0 + next.abs());
        value = next;
        if done {
            converged = true;
            break;
        }
    }
    let value = u.dot(&(m * &v));
    PmdSolution { u, v, value, iterations, converged }
}

fn power_start(a: &SymmetricMatrix, steps: usize) -> DVector<f64> {
    let p = a.dim();
    let m = a.as_matrix();
    let mut x = DVector::from_element(p, 1.0 / (p as f64).sqrt());
    for _ in 0..steps {
        let y = m * &x;
        let n = y.norm();
        if n == 0.0 || !n.is_finite() {
            break;
        }
        x = y / n;
    }
    x
}

/// `max v^T A v` over `||v||_2 <= 1, ||v||_1 <= sqrt(R)` for symmetric `A`.
///
/// `A` is shifted by `-g I`, where `g` is the Gershgorin lower bound, so the
/// shifted matrix is positive semidefinite and the rank-one decomposition
/// returns `u = v`. The reported value is `v^T A v` for the returned unit
/// `v`, which equals `lambda_pmd(A - gI) + g`. Using the tight Gershgorin
/// shift (rather than `max(0, -g)`) makes `A` and `A + tI` run the same
/// iteration, so the value is exactly shift-equivariant.
///
/// The alternation is non-convex and, for small `R`, every signed basis
/// vector is a fixed point. Besides the power start it is also run from the
/// basis vectors of the `STARTS` largest diagonal entries; the start with the
/// largest `v^T A v` wins, earlier starts on ties.
pub fn constrained_pmd(a: &SymmetricMatrix, budget: &SparsityBudget, opts: &PmdOptions) -> Result<SparseEigenResult> {
    budget.check_dim(a.dim())?;
    let p = a.dim();
    let shift = -gershgorin_lower_bound(a);
    let shifted = a.shift_diagonal(shift);
    let sqrt_r = budget.sqrt_r();

    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&i, &j| a.get(j, j).total_cmp(&a.get(i, i)).then(i.cmp(&j)));
    let starts =
        std::iter::once(power_start(&shifted, opts.power_iter)).chain(order.into_iter().take(STARTS).map(|i| {
            let mut e = DVector::zeros(p);
            e[i] = 1.0;
            e
        }));

    let mut best: Option<(f64, PmdSolution)> = None;
    let mut iterations = 0;
    for start in starts {
        let sol = pmd_from(&shifted, sqrt_r, opts, start);
        iterations += sol.iterations;
        let value = a.quadratic_form(&sol.v);
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, sol));
        }
    }
    let (value, sol) = best.expect("at least one start");
    Ok(SparseEigenResult::from_vector(value, sol.v, iterations, sol.converged))
}

const STARTS: usize = 3;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::min_eigenvalue;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(p: usize, seed: u64) -> SymmetricMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SymmetricMatrix::from_fn(p, |_, _| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn psd_shift_examples() {
        assert_eq!(psd_shift(&SymmetricMatrix::identity(3)), 0.0);
        assert_eq!(psd_shift(&SymmetricMatrix::from_diagonal(&[-2.0, 1.0])), 2.0);
    }

    #[test]
    fn psd_shift_makes_random_matrices_psd() {
        for seed in 0..20 {
            let a = random_symmetric(8, seed);
            let d = psd_shift(&a);
            assert!(min_eigenvalue(a.shift_diagonal(d).as_matrix()) >= -1e-10);
        }
    }

    #[test]
    fn identity_gives_a_basis_vector() {
        let b = SparsityBudget::from_sqrt_r(1.0, 3).unwrap();
        let sol = pmd_rank_one(&SymmetricMatrix::identity(3), &b, &PmdOptions::default()).unwrap();
        assert!((sol.value - 1.0).abs() < 1e-12);
        assert_eq!(sol.v.iter().filter(|x| x.abs() > 0.0).count(), 1);
        assert!((sol.v.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_picks_largest_entry() {
        let b = SparsityBudget::from_sqrt_r(1.0, 3).unwrap();
        let a = SymmetricMatrix::from_diagonal(&[3.0, 2.0, 1.0]);
        let sol = pmd_rank_one(&a, &b, &PmdOptions::default()).unwrap();
        assert!((sol.value - 3.0).abs() < 1e-12);
        assert!((sol.v[0].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn psd_input_gives_u_equal_v() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = DMatrix::from_fn(6, 6, |_, _| rng.gen_range(-1.0..1.0));
        let a = SymmetricMatrix::mirror_upper(&g * g.transpose());
        let b = SparsityBudget::from_sqrt_r(1.5, 6).unwrap();
        let opts = PmdOptions { tol: 1e-14, max_iter: 10_000, ..Default::default() };
        let sol = pmd_rank_one(&a, &b, &opts).unwrap();
        assert!(sol.converged);
        let gap = (&sol.u - &sol.v).norm().min((&sol.u + &sol.v).norm());
        assert!(gap < 1e-6, "gap {gap}");
        assert!(sol.u.lp_norm(1) <= 1.5 + 1e-8 && sol.v.lp_norm(1) <= 1.5 + 1e-8);
    }

    #[test]
    fn constrained_diagonal_and_zero() {
        let b = SparsityBudget::from_sqrt_r(1.0, 4).unwrap();
        let a = SymmetricMatrix::from_diagonal(&[-1.0, 4.0, -7.0, 2.0]);
        let r = constrained_pmd(&a, &b, &PmdOptions::default()).unwrap();
        assert!((r.value - 4.0).abs() < 1e-12);
        assert!(!r.negated);

        let b = SparsityBudget::new(0.7, 4).unwrap();
        let r = constrained_pmd(&SymmetricMatrix::zeros(4), &b, &PmdOptions::default()).unwrap();
        assert_eq!(r.value, 0.0);
        assert!((r.vector.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scalar_input() {
        let b = SparsityBudget::new(1.0, 1).unwrap();
        let r = constrained_pmd(&SymmetricMatrix::from_diagonal(&[-2.5]), &b, &PmdOptions::default()).unwrap();
        assert_eq!(r.value, -2.5);
        assert_eq!(r.vector.as_slice(), &[1.0]);
    }

    #[test]
    fn shift_equivariance() {
        let b = SparsityBudget::from_sqrt_r(1.7, 10).unwrap();
        for seed in 0..10 {
            let a = random_symmetric(10, 100 + seed);
            let base = constrained_pmd(&a, &b, &PmdOptions::default()).unwrap().value;
            for t in [-3.0, 0.5, 10.0] {
                let shifted = constrained_pmd(&a.shift_diagonal(t), &b, &PmdOptions::default()).unwrap().value;
                assert!((shifted - base - t).abs() < 1e-6, "seed {seed} t {t}: {shifted} vs {base}");
            }
        }
    }

    #[test]
    fn result_invariants_hold() {
        let b = SparsityBudget::new(0.4, 25).unwrap();
        for seed in 0..10 {
            let r = constrained_pmd(&random_symmetric(25, seed), &b, &PmdOptions::default()).unwrap();
            assert!((r.vector.norm() - 1.0).abs() <= 1e-10);
            assert!((r.leverage.sum() - 1.0).abs() <= 1e-10);
            assert!(r.vector.lp_norm(1) <= b.sqrt_r() + 1e-8);
            for i in 0..25 {
                assert_eq!(r.leverage[i], r.vector[i] * r.vector[i]);
            }
        }
    }
}
