//! Resampling goodness-of-fit test for the power-law hypothesis.
//!
//! N synthetic tails of exactly n points are drawn from the fitted
//! power law, each is re-fitted with the same estimator, and the p-value is
//! the fraction of synthetic KS distances strictly larger than the
//! empirical one. Replicates are seeded with a counter-based derivation
//! from one master seed, so the result is bit-identical however the
//! replicate loop is scheduled.

use crate::fmath;
use crate::rng::{derive_seed, Xoshiro256PlusPlus};
use crate::tail::{
    hill_estimate, regression_estimate, select_xmin, Estimator, FitConfig, Side, TailFit,
    TailSample,
};
use alloc::vec::Vec;
use core::fmt;

/// Inverse-transform map from a uniform draw on (0, 1] to a Pareto tail
/// point: `x = xmin · u^{−1/α}`. `u = 1` maps to the cutoff itself.
#[inline]
pub fn pareto_transform(u: f64, alpha: f64, xmin: f64) -> f64 {
    xmin * fmath::powf(u, -1.0 / alpha)
}

/// Draws `n` points from the Pareto tail with CCDF `(x/xmin)^{−α}`,
/// deterministically per seed.
pub fn sample_pareto(alpha: f64, xmin: f64, n: usize, seed: u64) -> Vec<f64> {
    assert!(alpha > 0.0 && xmin > 0.0 && n >= 1);
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    (0..n)
        .map(|_| pareto_transform(rng.unit_open_closed(), alpha, xmin))
        .collect()
}

/// Counter-based replicate seeding: replicate j, redraw attempt a.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedPolicy {
    pub master_seed: u64,
}

impl SeedPolicy {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    /// Seed for replicate `j`, attempt `a`. Injective in (j, a), independent
    /// of evaluation order.
    pub fn replicate_seed(&self, replicate: u32, attempt: u32) -> u64 {
        derive_seed(
            self.master_seed,
            replicate as u64 | ((attempt as u64) << 32),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GofConfig {
    /// Synthetic datasets per test.
    pub replicates: u32,
    /// Confidence level for the rejection decision.
    pub confidence: f64,
    /// Re-select the cutoff on every replicate instead of holding it at the
    /// empirical fit's value.
    pub refit_xmin: bool,
    pub fit: FitConfig,
}

impl Default for GofConfig {
    fn default() -> Self {
        Self {
            replicates: 1000,
            confidence: 0.95,
            refit_xmin: false,
            fit: FitConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GofError {
    /// At least 100 replicates are required for a meaningful p-value.
    TooFewReplicates { got: u32 },
    /// Confidence must lie strictly inside (0, 1).
    BadConfidence(f64),
    /// A replicate kept producing degenerate fits after many redraws.
    DegenerateReplicates { replicate: u32 },
}

impl fmt::Display for GofError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GofError::TooFewReplicates { got } => {
                write!(f, "need at least 100 replicates, got {got}")
            }
            GofError::BadConfidence(c) => write!(f, "confidence must be in (0,1), got {c}"),
            GofError::DegenerateReplicates { replicate } => {
                write!(f, "replicate {replicate} degenerate after 64 redraws")
            }
        }
    }
}

impl core::error::Error for GofError {}

/// Outcome of one resampling test; exactly re-runnable from the inputs and
/// `master_seed`.
#[derive(Debug, Clone, PartialEq)]
pub struct GofResult {
    pub estimator: Estimator,
    pub alpha_hat: f64,
    pub xmin: f64,
    pub n: usize,
    /// Empirical KS distance of the fit under test.
    pub d_emp: f64,
    pub replicates: u32,
    /// Synthetic distances D_j in replicate order.
    pub d_synthetic: Vec<f64>,
    /// Fraction of D_j strictly larger than `d_emp`.
    pub p_value: f64,
    pub confidence: f64,
    pub master_seed: u64,
    /// Total replicate redraws caused by degenerate refits.
    pub redraws: u32,
}

impl GofResult {
    /// Power-law hypothesis not rejected at the configured confidence.
    pub fn plausible(&self) -> bool {
        self.p_value >= 1.0 - self.confidence
    }

    /// Empirical quantile of the synthetic distances (nearest-rank).
    pub fn d_quantile(&self, q: f64) -> f64 {
        let mut sorted = self.d_synthetic.clone();
        sorted.sort_unstable_by(f64::total_cmp);
        let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
        sorted[rank - 1]
    }
}

/// Generates and scores one synthetic replicate at a time. Replicates are
/// pure functions of (master seed, replicate index), so callers may
/// evaluate them in any order or in parallel and still assemble the exact
/// sequential result.
#[derive(Debug, Clone)]
pub struct GofRunner {
    estimator: Estimator,
    alpha: f64,
    xmin: f64,
    n: usize,
    refit_xmin: bool,
    fit_cfg: FitConfig,
    policy: SeedPolicy,
}

const MAX_REDRAWS: u32 = 64;

impl GofRunner {
    pub fn new(fit: &TailFit, cfg: &GofConfig, policy: SeedPolicy) -> Self {
        Self {
            estimator: fit.estimator,
            alpha: fit.alpha,
            xmin: fit.xmin,
            n: fit.n,
            refit_xmin: cfg.refit_xmin,
            fit_cfg: cfg.fit,
            policy,
        }
    }

    pub fn replicates_of(cfg: &GofConfig) -> core::ops::Range<u32> {
        0..cfg.replicates
    }

    /// KS distance of replicate `j` against its own re-fit, plus the number
    /// of redraws that were needed.
    pub fn replicate(&self, j: u32) -> Result<(f64, u32), GofError> {
        for attempt in 0..MAX_REDRAWS {
            let seed = self.policy.replicate_seed(j, attempt);
            let xs = sample_pareto(self.alpha, self.xmin, self.n, seed);
            let sample = match TailSample::new(Side::Positive, xs) {
                Ok(s) => s,
                Err(_) => continue,
            };
            let refit = if self.refit_xmin {
                select_xmin(&sample, self.estimator, &self.fit_cfg)
            } else {
                match self.estimator {
                    Estimator::Hill => hill_estimate(&sample, self.xmin, &self.fit_cfg),
                    Estimator::Regression => {
                        regression_estimate(&sample, self.xmin, &self.fit_cfg)
                    }
                }
            };
            if let Ok(fit) = refit {
                return Ok((fit.ks, attempt));
            }
        }
        Err(GofError::DegenerateReplicates { replicate: j })
    }
}

/// Builds the result from replicate distances in replicate order. The
/// counting reduction is commutative, so any evaluation schedule that
/// preserves indices yields an identical result.
pub fn assemble_result(
    fit: &TailFit,
    cfg: &GofConfig,
    policy: SeedPolicy,
    d_synthetic: Vec<f64>,
    redraws: u32,
) -> GofResult {
    let d_emp = fit.ks;
    let larger = d_synthetic.iter().filter(|&&d| d > d_emp).count();
    GofResult {
        estimator: fit.estimator,
        alpha_hat: fit.alpha,
        xmin: fit.xmin,
        n: fit.n,
        d_emp,
        replicates: cfg.replicates,
        p_value: larger as f64 / d_synthetic.len() as f64,
        d_synthetic,
        confidence: cfg.confidence,
        master_seed: policy.master_seed,
        redraws,
    }
}

fn check_config(cfg: &GofConfig) -> Result<(), GofError> {
    if cfg.replicates < 100 {
        return Err(GofError::TooFewReplicates {
            got: cfg.replicates,
        });
    }
    if !(cfg.confidence > 0.0 && cfg.confidence < 1.0) {
        return Err(GofError::BadConfidence(cfg.confidence));
    }
    Ok(())
}

/// Runs the full resampling test for a fitted tail.
pub fn gof_test(
    fit: &TailFit,
    cfg: &GofConfig,
    policy: SeedPolicy,
) -> Result<GofResult, GofError> {
    check_config(cfg)?;
    let runner = GofRunner::new(fit, cfg, policy);
    let mut distances = Vec::with_capacity(cfg.replicates as usize);
    let mut redraws = 0u32;
    for j in GofRunner::replicates_of(cfg) {
        let (d, r) = runner.replicate(j)?;
        distances.push(d);
        redraws += r;
    }
    Ok(assemble_result(fit, cfg, policy, distances, redraws))
}

/// Bonferroni-adjusted rejection decisions for `m` simultaneous tests:
/// reject i iff `p_i < (1 − confidence)/m`.
pub fn bonferroni_adjust(p_values: &[f64], m: usize, confidence: f64) -> Vec<bool> {
    assert!(m >= 1, "test count must be at least 1");
    let threshold = (1.0 - confidence) / m as f64;
    p_values.iter().map(|&p| p < threshold).collect()
}
