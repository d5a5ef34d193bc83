use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generate::{base_covariance_with_scales, differential, draw_scales, enforce_pd, sample, ScenarioMatrices};
use super::{Scales, Scenario};
use crate::engine::{permutation_test, Method, TestConfig};
use crate::error::{Result, SledError};
use crate::matrix::{DataMatrix, SymmetricMatrix};
use crate::rng::{derive_key, domain, stream};
use crate::sparse_eig::Solver;

const WILSON_Z: f64 = 1.959_963_984_540_054;

/// Wilson score interval at 95% for `successes` out of `trials`.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = WILSON_Z * WILSON_Z;
    let center = (phat + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = WILSON_Z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n);
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// One method's result on one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub base: String,
    pub diff: String,
    pub noise: String,
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub c: f64,
    pub permutations: usize,
    pub reps: usize,
    pub seed: u64,
    pub null: bool,
    pub kind: String,
    pub method: String,
    pub rejections: usize,
    pub power: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub failures: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PowerTable {
    pub rows: Vec<PowerRow>,
}

impl PowerTable {
    pub fn row(&self, method: Method) -> Option<&PowerRow> {
        self.rows.iter().find(|r| r.method == method.name())
    }

    pub fn extend(&mut self, other: PowerTable) {
        self.rows.extend(other.rows);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row).map_err(|e| SledError::InvalidParameter(format!("csv: {e}")))?;
        }
        let bytes = w.into_inner().map_err(|e| SledError::InvalidParameter(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("power table serializes")
    }
}

fn enum_name<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(_) => String::new(),
    }
}

fn kind_name(kind: &crate::engine::RelationshipKind) -> String {
    match kind {
        crate::engine::RelationshipKind::Covariance => "covariance".into(),
        crate::engine::RelationshipKind::Correlation => "correlation".into(),
        crate::engine::RelationshipKind::Adjacency { beta } => format!("adjacency({beta})"),
    }
}

/// Draws the population matrices for repetition `rep`.
pub(crate) fn scenario_matrices(
    scenario: &Scenario,
    rep: usize,
    base_override: Option<&SymmetricMatrix>,
) -> Result<ScenarioMatrices> {
    let p = scenario.p;
    let mut rng = stream(derive_key(scenario.seed, domain::SCENARIO, rep as u64), 0);
    let sigma_star = match base_override {
        Some(s) => {
            if s.dim() != p {
                return Err(SledError::DimensionMismatch { expected: p, found: s.dim() });
            }
            s.clone()
        }
        None => {
            let scales = match scenario.scales {
                Scales::Unit => vec![1.0; p],
                Scales::PerScenario => draw_scales(p, &mut stream(derive_key(scenario.seed, domain::SCALES, 0), 0)),
                Scales::PerRepetition => {
                    draw_scales(p, &mut stream(derive_key(scenario.seed, domain::SCALES, 0), rep as u64))
                }
            };
            base_covariance_with_scales(scenario.base, &scales, &mut rng)?
        }
    };
    let d = if scenario.null { SymmetricMatrix::zeros(p) } else { differential(scenario.diff, &sigma_star, &mut rng)? };
    enforce_pd(&sigma_star, &d, scenario.pd_shift)
}

/// Draws `(X, Y)` for repetition `rep` from already generated matrices.
pub(crate) fn scenario_samples(
    scenario: &Scenario,
    rep: usize,
    mats: &ScenarioMatrices,
) -> Result<(DataMatrix, DataMatrix)> {
    let mut rng = stream(derive_key(scenario.seed, domain::SAMPLE, rep as u64), 0);
    let x = sample(&mats.sqrt1, scenario.n, scenario.noise, &mut rng)?;
    let y = sample(&mats.sqrt2, scenario.m, scenario.noise, &mut rng)?;
    Ok((x, y))
}

/// Public draw of one repetition: population matrices and both samples.
pub fn draw_repetition(
    scenario: &Scenario,
    rep: usize,
    base_override: Option<&SymmetricMatrix>,
) -> Result<(ScenarioMatrices, DataMatrix, DataMatrix)> {
    scenario.validate()?;
    let mats = scenario_matrices(scenario, rep, base_override)?;
    let (x, y) = scenario_samples(scenario, rep, &mats)?;
    Ok((mats, x, y))
}

/// Monte-Carlo rejection rates of `methods` on `scenario` at level `alpha`.
///
/// Repetition `r` draws its matrices and samples from streams keyed by
/// `(seed, r)` and runs every method's permutation test with permutation
/// seed derived from `(seed, r)`; a method rejects when `p < alpha`.
/// Repetitions whose test fails are counted in `failures` and excluded
/// from the power denominator.
pub fn power_study(
    scenario: &Scenario,
    methods: &[Method],
    alpha: f64,
    solver: &Solver,
    base_override: Option<&SymmetricMatrix>,
    threads: Option<usize>,
) -> Result<PowerTable> {
    scenario.validate()?;
    if methods.is_empty() {
        return Err(SledError::InvalidParameter("no methods requested".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(SledError::InvalidParameter(format!("alpha = {alpha} is outside (0, 1)")));
    }

    let one_rep = |rep: usize| -> Vec<Option<bool>> {
        let drawn =
            scenario_matrices(scenario, rep, base_override).and_then(|mats| scenario_samples(scenario, rep, &mats));
        let Ok((x, y)) = drawn else {
            return vec![None; methods.len()];
        };
        methods
            .iter()
            .map(|&method| {
                let config = TestConfig {
                    method,
                    kind: scenario.kind,
                    c: scenario.c,
                    solver: *solver,
                    permutations: scenario.permutations,
                    seed: derive_key(scenario.seed, domain::PERMUTATION, rep as u64),
                    ..TestConfig::default()
                };
                permutation_test(&x, &y, &config, None).ok().map(|r| r.p_value < alpha)
            })
            .collect()
    };
    let run = || (0..scenario.reps).into_par_iter().map(one_rep).collect::<Vec<_>>();
    let outcomes = match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| SledError::InvalidParameter(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    };

    let rows = methods
        .iter()
        .enumerate()
        .map(|(k, method)| {
            let rejections = outcomes.iter().filter(|o| o[k] == Some(true)).count();
            let failures = outcomes.iter().filter(|o| o[k].is_none()).count();
            let trials = scenario.reps - failures;
            let (ci_low, ci_high) = wilson_interval(rejections, trials);
            PowerRow {
                base: enum_name(&scenario.base),
                diff: enum_name(&scenario.diff),
                noise: enum_name(&scenario.noise),
                n: scenario.n,
                m: scenario.m,
                p: scenario.p,
                c: scenario.c,
                permutations: scenario.permutations,
                reps: scenario.reps,
                seed: scenario.seed,
                null: scenario.null,
                kind: kind_name(&scenario.kind),
                method: method.name().to_string(),
                rejections,
                power: if trials > 0 { rejections as f64 / trials as f64 } else { f64::NAN },
                ci_low,
                ci_high,
                failures,
            }
        })
        .collect();
    Ok(PowerTable { rows })
}
