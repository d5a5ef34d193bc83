use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use sled_core::competitors::{frobenius_statistic, max_statistic};
use sled_core::engine::{
    differential_matrix, permutation_test, sled_statistic, Method, PValueRule, RelationshipKind, TestConfig,
};
use sled_core::sparse_eig::{PmdOptions, Solver, SparsityBudget};
use sled_core::DataMatrix;

fn gaussian(n: usize, p: usize, rng: &mut ChaCha8Rng) -> DataMatrix {
    DataMatrix::new(DMatrix::from_fn(n, p, |_, _| rng.sample(StandardNormal))).unwrap()
}

const KINDS: [RelationshipKind; 3] =
    [RelationshipKind::Covariance, RelationshipKind::Correlation, RelationshipKind::Adjacency { beta: 3.0 }];

#[test]
fn hand_computed_covariance_difference() {
    // x: columns (1, 2, 3) and (2, 4, 6); y: zero-mean pair.
    let x = DataMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]]).unwrap();
    let y = DataMatrix::from_rows(&[vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 0.0]]).unwrap();
    let d = differential_matrix(&x, &y, RelationshipKind::Covariance).unwrap();
    // cov(x) = [[2/3, 4/3], [4/3, 8/3]], cov(y) = [[2/3, 0], [0, 0]].
    let expected = [[0.0, -4.0 / 3.0], [-4.0 / 3.0, -8.0 / 3.0]];
    for i in 0..2 {
        for j in 0..2 {
            assert!((d.get(i, j) - expected[i][j]).abs() < 1e-12);
        }
    }
}

#[test]
fn swapping_groups_negates_differential_and_keeps_statistic() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let x = gaussian(30, 12, &mut rng);
    let y = gaussian(25, 12, &mut rng);
    let budget = SparsityBudget::new(0.4, 12).unwrap();
    for kind in KINDS {
        let dxy = differential_matrix(&x, &y, kind).unwrap();
        let dyx = differential_matrix(&y, &x, kind).unwrap();
        assert_eq!(dxy.neg().as_matrix(), dyx.as_matrix());
        let (t1, r1) = sled_statistic(&dxy, &budget, &Solver::default()).unwrap();
        let (t2, r2) = sled_statistic(&dyx, &budget, &Solver::default()).unwrap();
        assert!((t1 - t2).abs() <= 1e-9 * t1.max(1.0), "{kind:?}: {t1} vs {t2}");
        if (r1.value - r2.value).abs() > 1e-9 {
            assert_ne!(r1.negated, r2.negated);
        }
    }
}

#[test]
fn covariance_statistic_scales_quadratically() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let x = gaussian(40, 15, &mut rng);
    let y = gaussian(40, 15, &mut rng);
    let budget = SparsityBudget::new(0.3, 15).unwrap();
    // The stopping rule has an absolute part, so at the default tolerance
    // equivariance holds only to about `tol`; solve to convergence instead.
    let solver = Solver::Pmd(PmdOptions { tol: 1e-14, max_iter: 100_000, ..Default::default() });
    let base = sled_statistic(&differential_matrix(&x, &y, RelationshipKind::Covariance).unwrap(), &budget, &solver)
        .unwrap()
        .0;
    for t in [0.5, 3.0] {
        let d = differential_matrix(&x.scaled(t), &y.scaled(t), RelationshipKind::Covariance).unwrap();
        let scaled = sled_statistic(&d, &budget, &solver).unwrap().0;
        assert!((scaled - t * t * base).abs() <= 1e-8 * t * t * base, "t {t}: {scaled} vs {}", t * t * base);
    }
}

#[test]
fn single_permutation_gives_zero_or_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let x = gaussian(20, 10, &mut rng);
    let y = gaussian(20, 10, &mut rng);
    for seed in 0..5 {
        let config = TestConfig { permutations: 1, seed, c: 0.5, ..TestConfig::default() };
        let r = permutation_test(&x, &y, &config, Some(1)).unwrap();
        assert!(r.p_value == 0.0 || r.p_value == 1.0);
        let expected = if r.null_stats[0] > r.statistic { 1.0 } else { 0.0 };
        assert_eq!(r.p_value, expected);
    }
}

#[test]
fn p_value_matches_definition_and_add_one_is_never_smaller() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    let x = gaussian(25, 10, &mut rng);
    let y = gaussian(25, 10, &mut rng);
    for method in [Method::Sled, Method::Frobenius, Method::Max] {
        let strict = TestConfig {
            method,
            permutations: 60,
            seed: 9,
            c: 0.5,
            kind: RelationshipKind::Covariance,
            ..TestConfig::default()
        };
        let r = permutation_test(&x, &y, &strict, Some(1)).unwrap();
        let count = r.null_stats.iter().filter(|&&t| t > r.statistic).count();
        assert_eq!(r.p_value, count as f64 / 60.0);
        let add_one = TestConfig { p_value_rule: PValueRule::AddOne, ..strict };
        let r2 = permutation_test(&x, &y, &add_one, Some(1)).unwrap();
        assert_eq!(r2.null_stats, r.null_stats);
        assert!(r2.p_value >= r.p_value && r2.p_value > 0.0);
    }
}

#[test]
fn leverage_sums_to_one_and_follows_the_winning_vector() {
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    let x = gaussian(30, 20, &mut rng);
    let mut y = gaussian(30, 20, &mut rng).values().clone();
    // Inflate a block of features in y.
    for i in 0..30 {
        for j in 0..3 {
            y[(i, j)] *= 3.0;
        }
    }
    let y = DataMatrix::new(y).unwrap();
    let config = TestConfig { kind: RelationshipKind::Covariance, c: 0.2, permutations: 20, ..TestConfig::default() };
    let r = permutation_test(&x, &y, &config, Some(1)).unwrap();
    assert!((r.leverage.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    let top = (0..20).max_by(|&a, &b| r.leverage[a].total_cmp(&r.leverage[b])).unwrap();
    assert!(top < 3, "top leverage feature {top}");
}

#[test]
fn competitors_ignore_feature_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(36);
    let x = gaussian(30, 8, &mut rng);
    let y = gaussian(35, 8, &mut rng);
    let perm = [3, 0, 7, 1, 6, 2, 5, 4];
    let (xp, yp) = (x.select_columns(&perm), y.select_columns(&perm));
    for kind in KINDS {
        let a = frobenius_statistic(&differential_matrix(&x, &y, kind).unwrap());
        let b = frobenius_statistic(&differential_matrix(&xp, &yp, kind).unwrap());
        assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }
    let a = max_statistic(&x, &y).unwrap();
    let b = max_statistic(&xp, &yp).unwrap();
    assert!((a - b).abs() <= 1e-12 * a.max(1.0));
}

#[test]
fn frobenius_dominates_squared_largest_entry() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    for _ in 0..10 {
        let x = gaussian(20, 9, &mut rng);
        let y = gaussian(20, 9, &mut rng);
        let d = differential_matrix(&x, &y, RelationshipKind::Covariance).unwrap();
        assert!(frobenius_statistic(&d) >= d.max_abs().powi(2));
    }
}

#[test]
fn mismatched_features_are_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(38);
    let x = gaussian(10, 5, &mut rng);
    let y = gaussian(10, 6, &mut rng);
    let err = permutation_test(&x, &y, &TestConfig::default(), Some(1)).unwrap_err();
    assert!(err.is_validation());
}
