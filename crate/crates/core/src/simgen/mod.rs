//! Simulation scenarios: base covariances, differential matrices, noise
//! distributions, and Monte-Carlo power studies.

mod generate;
mod noise;
mod power;

use serde::{Deserialize, Serialize};

use crate::engine::RelationshipKind;
use crate::error::{Result, SledError};

pub use generate::{
    base_covariance, base_covariance_with_scales, differential, draw_scales, enforce_pd, sample, signal_level, PdShift,
    ScenarioMatrices,
};
pub use noise::Noise;
pub use power::{draw_repetition, power_study, wilson_interval, PowerRow, PowerTable};

/// Base covariance structure `Sigma* = Lambda^{1/2} Delta Lambda^{1/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaseKind {
    /// Unit diagonal, symmetric Bernoulli(0.05) off-diagonal entries.
    NoisyDiagonal,
    /// Blocks of 10 features with within-block correlation 0.55.
    BlockDiagonal,
    /// `0.5^{|i - j|}`.
    ExpDecay,
}

/// Structure of `D = Sigma_2 - Sigma_1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiffKind {
    /// Uniform entries on a `floor(0.1 p)` square block.
    SparseBlock,
    /// Rank one `d v v^T` with `floor(0.2 p)` nonzero loadings.
    SoftSparseSpiked,
}

/// How the diagonal scales `Lambda` are chosen.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scales {
    /// Fresh `Unif(0.5, 2.5)` draws for every repetition.
    #[default]
    PerRepetition,
    /// One draw shared by all repetitions of a scenario.
    PerScenario,
    /// `Lambda = I`, so `Sigma*` is a correlation matrix.
    Unit,
}

fn default_kind() -> RelationshipKind {
    RelationshipKind::Covariance
}

fn default_c() -> f64 {
    0.3
}

/// One simulation cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub base: BaseKind,
    pub diff: DiffKind,
    pub noise: Noise,
    pub n: usize,
    pub m: usize,
    pub p: usize,
    #[serde(default = "default_c")]
    pub c: f64,
    pub permutations: usize,
    pub reps: usize,
    pub seed: u64,
    /// Force `Sigma_2 = Sigma_1` (size study).
    #[serde(default)]
    pub null: bool,
    #[serde(default = "default_kind")]
    pub kind: RelationshipKind,
    #[serde(default)]
    pub scales: Scales,
    #[serde(default)]
    pub pd_shift: PdShift,
}

impl Scenario {
    /// A cell with the defaults used by the published power tables:
    /// `c = 0.3`, covariance kind, literal positive-definiteness shift.
    pub fn new(base: BaseKind, diff: DiffKind, noise: Noise, n: usize, m: usize, p: usize) -> Self {
        Self {
            base,
            diff,
            noise,
            n,
            m,
            p,
            c: default_c(),
            permutations: 100,
            reps: 100,
            seed: 0,
            null: false,
            kind: default_kind(),
            scales: Scales::default(),
            pd_shift: PdShift::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in
            [("n", self.n), ("m", self.m), ("p", self.p), ("permutations", self.permutations), ("reps", self.reps)]
        {
            if v == 0 {
                return Err(SledError::InvalidParameter(format!("{name} must be at least 1")));
            }
        }
        if self.n < 2 || self.m < 2 {
            return Err(SledError::InvalidParameter("n and m must be at least 2".into()));
        }
        if !(self.c > 0.0 && self.c <= 1.0) {
            return Err(SledError::InvalidParameter(format!("c = {} is outside (0, 1]", self.c)));
        }
        if self.p < 10 && (self.base == BaseKind::BlockDiagonal || !self.null) {
            return Err(SledError::InvalidParameter(format!(
                "p = {} too small: block-diagonal bases and differential matrices need p >= 10",
                self.p
            )));
        }
        self.kind.validate()
    }
}
