//! Power-law tail fitting: empirical CCDF, Hill and log-log regression
//! estimators, KS distance, and KS-minimizing cutoff selection.
//!
//! The exponent α is the CCDF exponent of `P(X > x) ~ x^{-α}` (the density
//! decays with α+1). Fits operate on tail magnitudes: positive standardized
//! returns directly, absolute values of negative ones.

use crate::fmath;
use crate::returns::ReturnSeries;
use crate::stats;
use alloc::vec::Vec;
use core::fmt;

/// Which distribution tail a sample was taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Side {
    Positive,
    Negative,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Positive, Side::Negative];

    pub fn as_str(&self) -> &'static str {
        match self {
            Side::Positive => "positive",
            Side::Negative => "negative",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Tail-exponent estimation method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Estimator {
    Hill,
    Regression,
}

impl Estimator {
    pub const ALL: [Estimator; 2] = [Estimator::Hill, Estimator::Regression];

    pub fn as_str(&self) -> &'static str {
        match self {
            Estimator::Hill => "hill",
            Estimator::Regression => "regression",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TailError {
    /// No values on the requested side.
    EmptySample,
    /// A tail magnitude was non-finite or not strictly positive.
    InvalidValue(f64),
    /// The cutoff must be positive and finite.
    BadCutoff(f64),
    /// Fewer tail points above the cutoff than the configured floor.
    InsufficientTail { available: usize, required: usize },
    /// All tail points equal the cutoff; the log-sum vanishes.
    DegenerateTail,
    /// Regression needs at least three distinct tail values.
    TooFewDistinct { available: usize },
}

impl fmt::Display for TailError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TailError::EmptySample => write!(f, "empty tail sample"),
            TailError::InvalidValue(v) => write!(f, "tail values must be positive, got {v}"),
            TailError::BadCutoff(v) => write!(f, "cutoff must be positive, got {v}"),
            TailError::InsufficientTail { available, required } => {
                write!(f, "insufficient tail: {available} points above cutoff, need {required}")
            }
            TailError::DegenerateTail => write!(f, "degenerate tail: all points equal the cutoff"),
            TailError::TooFewDistinct { available } => {
                write!(f, "too few distinct tail values: {available}, need 3")
            }
        }
    }
}

impl core::error::Error for TailError {}

/// Fit knobs shared by all estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FitConfig {
    /// Minimum tail points per fit. Hill's relative standard error is
    /// 1/√n; below ~50 points the estimate carries little information.
    pub n_min: usize,
    /// Cutoff-candidate budget for [`select_xmin`]: all distinct values are
    /// scanned up to this count, beyond it a log-spaced subset is used.
    pub max_candidates: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            n_min: 50,
            max_candidates: 2000,
        }
    }
}

/// Magnitudes of one distribution tail, sorted ascending, all positive.
#[derive(Debug, Clone)]
pub struct TailSample {
    side: Side,
    values: Vec<f64>,
}

impl TailSample {
    pub fn new(side: Side, mut values: Vec<f64>) -> Result<Self, TailError> {
        if values.is_empty() {
            return Err(TailError::EmptySample);
        }
        for &v in &values {
            if !(v > 0.0) || !v.is_finite() {
                return Err(TailError::InvalidValue(v));
            }
        }
        values.sort_unstable_by(f64::total_cmp);
        Ok(Self { side, values })
    }

    /// Extracts a tail from a return series: positive returns as-is, or
    /// magnitudes of negative returns. Exact zeros belong to neither tail.
    pub fn from_returns(series: &ReturnSeries, side: Side) -> Result<Self, TailError> {
        let values: Vec<f64> = match side {
            Side::Positive => series.values.iter().copied().filter(|&v| v > 0.0).collect(),
            Side::Negative => series
                .values
                .iter()
                .filter(|&&v| v < 0.0)
                .map(|&v| -v)
                .collect(),
        };
        Self::new(side, values)
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Values in ascending order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// A fitted power-law tail.
#[derive(Debug, Clone, PartialEq)]
pub struct TailFit {
    pub estimator: Estimator,
    /// CCDF exponent α̂.
    pub alpha: f64,
    /// Lower cutoff of the fitted region.
    pub xmin: f64,
    /// Tail points with x ≥ xmin.
    pub n: usize,
    /// α̂/√n for the Hill estimator; absent for regression.
    pub stderr: Option<f64>,
    /// KS distance of the fit over the tail region.
    pub ks: f64,
}

/// Empirical complementary CDF evaluated at the sample's distinct values,
/// with the standard-normal reference at the same abscissae.
#[derive(Debug, Clone)]
pub struct CcdfPoints {
    pub xs: Vec<f64>,
    /// Q̄(x) = #{x_i > x} / n.
    pub ccdf: Vec<f64>,
    /// 1 − Φ(x).
    pub gauss: Vec<f64>,
}

/// Step-function CCDF with ties merged.
pub fn empirical_ccdf(tail: &TailSample) -> CcdfPoints {
    let values = &tail.values;
    let n = values.len() as f64;
    let mut xs = Vec::new();
    let mut ccdf = Vec::new();
    let mut gauss = Vec::new();
    let mut i = 0usize;
    while i < values.len() {
        let x = values[i];
        let mut j = i + 1;
        while j < values.len() && values[j] == x {
            j += 1;
        }
        xs.push(x);
        ccdf.push((values.len() - j) as f64 / n);
        gauss.push(stats::normal_ccdf(x));
        i = j;
    }
    CcdfPoints { xs, ccdf, gauss }
}

/// KS distance between the fitted conditional tail CDF
/// `F(x) = 1 − (x/xmin)^{−α}` and the empirical step function, evaluated on
/// both sides of each step. `values` must be sorted ascending with every
/// element ≥ `xmin`.
pub fn ks_statistic(values: &[f64], alpha: f64, xmin: f64) -> f64 {
    debug_assert!(values.windows(2).all(|w| w[0] <= w[1]));
    debug_assert!(values.first().map_or(true, |&v| v >= xmin));
    let ln_xmin = fmath::ln(xmin);
    let lns: Vec<f64> = values.iter().map(|&v| fmath::ln(v)).collect();
    ks_from_ln(&lns, ln_xmin, alpha)
}

fn ks_from_ln(ln_tail: &[f64], ln_xmin: f64, alpha: f64) -> f64 {
    let n = ln_tail.len() as f64;
    let mut d = 0.0f64;
    for (i, &l) in ln_tail.iter().enumerate() {
        // F(x) = 1 − exp(−α·ln(x/xmin)), via expm1 for small exponents
        let fitted = -fmath::exp_m1(-alpha * (l - ln_xmin));
        let lo = fmath::abs(fitted - i as f64 / n);
        let hi = fmath::abs(fitted - (i as f64 + 1.0) / n);
        d = d.max(lo.max(hi));
    }
    d
}

/// Like [`ks_from_ln`], but gives up once the running maximum exceeds
/// `abort_above`: a candidate whose partial distance is already worse than
/// the incumbent can never become the minimizer.
fn ks_from_ln_bounded(ln_tail: &[f64], ln_xmin: f64, alpha: f64, abort_above: f64) -> Option<f64> {
    let n = ln_tail.len() as f64;
    let mut d = 0.0f64;
    for (i, &l) in ln_tail.iter().enumerate() {
        let fitted = -fmath::exp_m1(-alpha * (l - ln_xmin));
        let lo = fmath::abs(fitted - i as f64 / n);
        let hi = fmath::abs(fitted - (i as f64 + 1.0) / n);
        d = d.max(lo.max(hi));
        if d > abort_above {
            return None;
        }
    }
    Some(d)
}

fn tail_start(values: &[f64], xmin: f64) -> usize {
    values.partition_point(|&v| v < xmin)
}

fn check_cutoff(xmin: f64) -> Result<(), TailError> {
    if !(xmin > 0.0) || !xmin.is_finite() {
        return Err(TailError::BadCutoff(xmin));
    }
    Ok(())
}

/// Hill maximum-likelihood estimate at a fixed cutoff:
/// `α̂ = n / Σ ln(x_i / xmin)` over tail points, with σ = α̂/√n.
pub fn hill_estimate(
    tail: &TailSample,
    xmin: f64,
    cfg: &FitConfig,
) -> Result<TailFit, TailError> {
    check_cutoff(xmin)?;
    let start = tail_start(&tail.values, xmin);
    let lns: Vec<f64> = tail.values[start..].iter().map(|&v| fmath::ln(v)).collect();
    let ln_xmin = fmath::ln(xmin);
    hill_from_ln(&lns, ln_xmin, xmin, cfg)
}

fn hill_from_ln(
    ln_tail: &[f64],
    ln_xmin: f64,
    xmin: f64,
    cfg: &FitConfig,
) -> Result<TailFit, TailError> {
    let n = ln_tail.len();
    if n < cfg.n_min {
        return Err(TailError::InsufficientTail {
            available: n,
            required: cfg.n_min,
        });
    }
    let log_sum: f64 = ln_tail.iter().map(|&l| l - ln_xmin).sum();
    if !(log_sum > 0.0) {
        return Err(TailError::DegenerateTail);
    }
    let alpha = n as f64 / log_sum;
    Ok(TailFit {
        estimator: Estimator::Hill,
        alpha,
        xmin,
        n,
        stderr: Some(alpha / fmath::sqrt(n as f64)),
        ks: ks_from_ln(ln_tail, ln_xmin, alpha),
    })
}

/// Builds the (ln x, ln Q̄(x)) points of the within-tail CCDF for distinct
/// tail values with Q̄ > 0. Input is the sorted ln-tail.
fn tail_loglog_points(ln_tail: &[f64], out: &mut Vec<(f64, f64)>) {
    out.clear();
    let n = ln_tail.len();
    let nf = n as f64;
    let mut i = 0usize;
    while i < n {
        let l = ln_tail[i];
        let mut j = i + 1;
        while j < n && ln_tail[j] == l {
            j += 1;
        }
        if n - j > 0 {
            out.push((l, fmath::ln((n - j) as f64 / nf)));
        }
        i = j;
    }
}

/// OLS slope of y on x.
fn slope_of(points: &[(f64, f64)]) -> f64 {
    let nf = points.len() as f64;
    let x_bar = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let y_bar = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(x, y) in points {
        let dx = x - x_bar;
        sxx += dx * dx;
        sxy += dx * (y - y_bar);
    }
    sxy / sxx
}

/// Least-squares fit of `ln Q̄(x)` on `ln x` over distinct tail values;
/// `α̂ = −slope`. The within-tail CCDF shifts `ln Q̄` by a constant relative
/// to the full-sample one, leaving the slope unchanged.
pub fn regression_estimate(
    tail: &TailSample,
    xmin: f64,
    cfg: &FitConfig,
) -> Result<TailFit, TailError> {
    check_cutoff(xmin)?;
    let start = tail_start(&tail.values, xmin);
    let lns: Vec<f64> = tail.values[start..].iter().map(|&v| fmath::ln(v)).collect();
    let mut points = Vec::new();
    regression_from_ln(&lns, fmath::ln(xmin), xmin, cfg, &mut points)
}

fn regression_from_ln(
    ln_tail: &[f64],
    ln_xmin: f64,
    xmin: f64,
    cfg: &FitConfig,
    scratch: &mut Vec<(f64, f64)>,
) -> Result<TailFit, TailError> {
    let n = ln_tail.len();
    if n < cfg.n_min {
        return Err(TailError::InsufficientTail {
            available: n,
            required: cfg.n_min,
        });
    }
    tail_loglog_points(ln_tail, scratch);
    if scratch.len() < 3 {
        // +1 for the largest value, excluded because its CCDF is zero
        return Err(TailError::TooFewDistinct {
            available: if ln_tail.is_empty() { 0 } else { scratch.len() + 1 },
        });
    }
    let alpha = -slope_of(scratch);
    Ok(TailFit {
        estimator: Estimator::Regression,
        alpha,
        xmin,
        n,
        stderr: None,
        ks: ks_from_ln(ln_tail, ln_xmin, alpha),
    })
}

/// Cutoff candidates as indices of first occurrences in the sorted values:
/// every distinct value when few enough, otherwise a log-spaced subset
/// snapped down to observed values.
fn cutoff_candidates(values: &[f64], lns: &[f64], max_candidates: usize) -> Vec<usize> {
    let mut first_idx: Vec<usize> = Vec::new();
    for i in 0..values.len() {
        if i == 0 || values[i] != values[i - 1] {
            first_idx.push(i);
        }
    }
    if first_idx.len() <= max_candidates {
        return first_idx;
    }
    let lo = lns[first_idx[0]];
    let hi = lns[*first_idx.last().unwrap()];
    let mut out: Vec<usize> = Vec::with_capacity(max_candidates);
    for k in 0..max_candidates {
        let target = lo + (hi - lo) * k as f64 / (max_candidates - 1) as f64;
        let pos = first_idx.partition_point(|&i| lns[i] <= target);
        let snapped = first_idx[pos.max(1) - 1];
        if out.last() != Some(&snapped) {
            out.push(snapped);
        }
    }
    out
}

/// Per-candidate exponent evaluation in O(1) from suffix sums.
struct CandidateAlpha {
    /// Σ ln v over values[i..], accumulated from the top.
    ln_suffix: Vec<f64>,
    /// Distinct-point suffix sums for the log-log regression slope:
    /// over points k ≥ q of x = ln v_k, w = ln(#{values > v_k}).
    reg: Option<RegSuffix>,
}

struct RegSuffix {
    /// First-occurrence index of each distinct value (regression points;
    /// the largest distinct value is excluded, its CCDF count is zero).
    point_idx: Vec<usize>,
    sx: Vec<f64>,
    sw: Vec<f64>,
    sxx: Vec<f64>,
    sxw: Vec<f64>,
}

impl CandidateAlpha {
    fn build(values: &[f64], lns: &[f64], estimator: Estimator) -> Self {
        let n = values.len();
        let mut ln_suffix = alloc::vec![0.0f64; n + 1];
        for i in (0..n).rev() {
            ln_suffix[i] = ln_suffix[i + 1] + lns[i];
        }
        let reg = (estimator == Estimator::Regression).then(|| {
            let mut point_idx = Vec::new();
            for i in 0..n {
                if (i == 0 || values[i] != values[i - 1]) && {
                    // count of strictly larger values; zero for the maximum
                    let j = values.partition_point(|&v| v <= values[i]);
                    n - j > 0
                } {
                    point_idx.push(i);
                }
            }
            let m = point_idx.len();
            let mut sx = alloc::vec![0.0f64; m + 1];
            let mut sw = sx.clone();
            let mut sxx = sx.clone();
            let mut sxw = sx.clone();
            for k in (0..m).rev() {
                let i = point_idx[k];
                let x = lns[i];
                let gt = n - values.partition_point(|&v| v <= values[i]);
                let w = fmath::ln(gt as f64);
                sx[k] = sx[k + 1] + x;
                sw[k] = sw[k + 1] + w;
                sxx[k] = sxx[k + 1] + x * x;
                sxw[k] = sxw[k + 1] + x * w;
            }
            RegSuffix {
                point_idx,
                sx,
                sw,
                sxx,
                sxw,
            }
        });
        Self { ln_suffix, reg }
    }

    /// α̂ for the tail starting at `idx`, or None when degenerate.
    fn alpha_at(&self, idx: usize, n_tail: usize, ln_xmin: f64, estimator: Estimator) -> Option<f64> {
        match estimator {
            Estimator::Hill => {
                let log_sum = self.ln_suffix[idx] - n_tail as f64 * ln_xmin;
                (log_sum > 0.0).then(|| n_tail as f64 / log_sum)
            }
            Estimator::Regression => {
                let reg = self.reg.as_ref().unwrap();
                let q = reg.point_idx.partition_point(|&i| i < idx);
                let m = reg.point_idx.len() - q;
                if m < 3 {
                    return None;
                }
                let mf = m as f64;
                // slope of (ln Q̄ within tail) on ln x; the per-candidate
                // −ln n_tail shift of w is constant and cancels in the slope
                let sx = reg.sx[q];
                let sw = reg.sw[q];
                let den = reg.sxx[q] - sx * sx / mf;
                let num = reg.sxw[q] - sx * sw / mf;
                (den > 0.0).then(|| -(num / den))
            }
        }
    }
}

/// Scans cutoff candidates, fits each with the requested estimator, and
/// returns the fit minimizing the KS distance. Ties break toward the
/// smaller cutoff (larger tail). The scan is a pure function of the sample:
/// permuting input values cannot change the result.
///
/// Candidates are visited from the largest cutoff down so that the running
/// minimum shrinks early and lets the KS evaluation of hopeless candidates
/// abort after a few points; a tie replaces the incumbent, which preserves
/// the smaller-cutoff preference.
pub fn select_xmin(
    tail: &TailSample,
    estimator: Estimator,
    cfg: &FitConfig,
) -> Result<TailFit, TailError> {
    let values = &tail.values;
    if values.len() < cfg.n_min {
        return Err(TailError::InsufficientTail {
            available: values.len(),
            required: cfg.n_min,
        });
    }
    let lns: Vec<f64> = values.iter().map(|&v| fmath::ln(v)).collect();
    let candidates = cutoff_candidates(values, &lns, cfg.max_candidates);
    let alphas = CandidateAlpha::build(values, &lns, estimator);
    let mut best: Option<(f64, f64)> = None; // (d, xmin)
    let mut any_candidate = false;
    for &idx in candidates.iter().rev() {
        let n_tail = values.len() - idx;
        if n_tail < cfg.n_min {
            continue;
        }
        any_candidate = true;
        let ln_xmin = lns[idx];
        let Some(alpha) = alphas.alpha_at(idx, n_tail, ln_xmin, estimator) else {
            continue;
        };
        if !(alpha > 0.0) {
            continue;
        }
        let bound = best.map_or(f64::INFINITY, |(bd, _)| bd);
        if let Some(d) = ks_from_ln_bounded(&lns[idx..], ln_xmin, alpha, bound) {
            best = Some((d, values[idx]));
        }
    }
    let Some((_, best_xmin)) = best else {
        return if any_candidate {
            Err(TailError::DegenerateTail)
        } else {
            Err(TailError::InsufficientTail {
                available: values.len(),
                required: cfg.n_min,
            })
        };
    };
    match estimator {
        Estimator::Hill => hill_estimate(tail, best_xmin, cfg),
        Estimator::Regression => regression_estimate(tail, best_xmin, cfg),
    }
}
