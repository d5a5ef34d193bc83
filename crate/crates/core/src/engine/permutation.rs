use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::relationship::{group_relationship, Centering, RelationshipKind};
use super::{sled_statistic, Method};
use crate::competitors::{frobenius_statistic, max_statistic_values};
use crate::error::{Result, SledError};
use crate::matrix::DataMatrix;
use crate::rng;
use crate::sparse_eig::{Solver, SparseEigenResult, SparsityBudget};

/// How the permutation p-value is formed from the null statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PValueRule {
    /// `#{T* > T} / B`.
    #[default]
    Strict,
    /// `(1 + #{T* >= T}) / (B + 1)`.
    AddOne,
}

pub fn p_value(statistic: f64, null_stats: &[f64], rule: PValueRule) -> f64 {
    let b = null_stats.len() as f64;
    match rule {
        PValueRule::Strict => null_stats.iter().filter(|&&t| t > statistic).count() as f64 / b,
        PValueRule::AddOne => (1.0 + null_stats.iter().filter(|&&t| t >= statistic).count() as f64) / (b + 1.0),
    }
}

/// Everything that determines the numbers a permutation test produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    pub method: Method,
    pub kind: RelationshipKind,
    pub centering: Centering,
    /// Sparsity constant: `sqrt(R) = c sqrt(p)`, raised to 1 when smaller.
    pub c: f64,
    pub solver: Solver,
    pub permutations: usize,
    pub seed: u64,
    pub p_value_rule: PValueRule,
}

impl Default for TestConfig {
    fn default() -> Self {
        Self {
            method: Method::Sled,
            kind: RelationshipKind::Correlation,
            centering: Centering::PerGroup,
            c: 0.1,
            solver: Solver::default(),
            permutations: 1000,
            seed: 0,
            p_value_rule: PValueRule::Strict,
        }
    }
}

impl TestConfig {
    pub fn validate(&self) -> Result<()> {
        self.kind.validate()?;
        if self.permutations == 0 {
            return Err(SledError::InvalidParameter("number of permutations must be at least 1".into()));
        }
        if !(self.c > 0.0 && self.c <= 1.0) {
            return Err(SledError::InvalidBudget(format!("c = {} is outside (0, 1]", self.c)));
        }
        Ok(())
    }

    pub fn budget(&self, p: usize) -> Result<SparsityBudget> {
        SparsityBudget::clamped(self.c, p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationTestResult {
    pub statistic: f64,
    pub null_stats: Vec<f64>,
    pub p_value: f64,
    /// Squared winning sparse eigenvector; empty for the baseline methods.
    pub leverage: Vec<f64>,
    pub negated: bool,
    pub permutations: usize,
    pub seed: u64,
    /// Solves (observed or replicate) that hit the iteration cap.
    pub nonconverged: usize,
}

struct Evaluation {
    statistic: f64,
    eig: Option<SparseEigenResult>,
}

/// Pooled samples plus everything needed to score one grouping.
struct Scorer<'a> {
    pooled: DMatrix<f64>,
    config: &'a TestConfig,
    budget: SparsityBudget,
}

impl Scorer<'_> {
    fn score(&self, rows1: &[usize], rows2: &[usize]) -> Result<Evaluation> {
        let g1 = self.pooled.select_rows(rows1);
        let g2 = self.pooled.select_rows(rows2);
        match self.config.method {
            Method::Max => Ok(Evaluation { statistic: max_statistic_values(&g1, &g2)?, eig: None }),
            Method::Frobenius => {
                let d = self.differential(&g1, &g2)?;
                Ok(Evaluation { statistic: frobenius_statistic(&d), eig: None })
            }
            Method::Sled => {
                let d = self.differential(&g1, &g2)?;
                let (statistic, eig) = sled_statistic(&d, &self.budget, &self.config.solver)?;
                Ok(Evaluation { statistic, eig: Some(eig) })
            }
        }
    }

    fn differential(&self, g1: &DMatrix<f64>, g2: &DMatrix<f64>) -> Result<crate::SymmetricMatrix> {
        let center = self.config.centering == Centering::PerGroup;
        let kind: RelationshipKind = self.config.kind;
        Ok(group_relationship(g2, kind, center)?.sub(&group_relationship(g1, kind, center)?))
    }
}

/// Permutation test of equal relationship matrices between `x` and `y`.
///
/// The pooled sample is `x` rows then `y` rows. Replicate `b` shuffles the
/// pooled indices with [`rng::stream`]`(seed, b)`, takes the first `n` as
/// pseudo-group 1 and recomputes the full statistic. Replicates run on a
/// pool of `threads` workers (`None`: the ambient rayon pool); since each
/// replicate's stream depends only on `(seed, b)`, results are identical
/// for any worker count.
pub fn permutation_test(
    x: &DataMatrix,
    y: &DataMatrix,
    config: &TestConfig,
    threads: Option<usize>,
) -> Result<PermutationTestResult> {
    config.validate()?;
    if x.p() != y.p() {
        return Err(SledError::DimensionMismatch { expected: x.p(), found: y.p() });
    }
    let (n, m) = (x.n(), y.n());
    if n + m < 4 || n < 2 || m < 2 {
        return Err(SledError::InvalidParameter(format!("need at least 2 samples per group, got n = {n}, m = {m}")));
    }

    let mut pooled = x.stack(y)?.values().clone();
    if config.centering == Centering::Global {
        pooled = super::relationship::center_columns(&pooled);
    }
    let scorer = Scorer { pooled, config, budget: config.budget(x.p())? };

    let rows1: Vec<usize> = (0..n).collect();
    let rows2: Vec<usize> = (n..n + m).collect();
    let observed = scorer.score(&rows1, &rows2)?;

    let replicate = |b: usize| -> Result<(f64, bool)> {
        let mut idx: Vec<usize> = (0..n + m).collect();
        idx.shuffle(&mut rng::stream(config.seed, b as u64));
        let eval = scorer.score(&idx[..n], &idx[n..])?;
        let converged = eval.eig.as_ref().is_none_or(|e| e.converged);
        Ok((eval.statistic, converged))
    };
    let run = || (0..config.permutations).into_par_iter().map(replicate).collect::<Result<Vec<_>>>();
    let replicates = match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| SledError::InvalidParameter(format!("thread pool: {e}")))?
            .install(run)?,
        None => run()?,
    };

    let null_stats: Vec<f64> = replicates.iter().map(|r| r.0).collect();
    let mut nonconverged = replicates.iter().filter(|r| !r.1).count();
    if observed.eig.as_ref().is_some_and(|e| !e.converged) {
        nonconverged += 1;
    }
    let (leverage, negated) = match &observed.eig {
        Some(e) => (e.leverage.iter().copied().collect(), e.negated),
        None => (Vec::new(), false),
    };

    Ok(PermutationTestResult {
        p_value: p_value(observed.statistic, &null_stats, config.p_value_rule),
        statistic: observed.statistic,
        null_stats,
        leverage,
        negated,
        permutations: config.permutations,
        seed: config.seed,
        nonconverged,
    })
}
