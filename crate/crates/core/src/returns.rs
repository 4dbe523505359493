//! Evenly spaced bars, log-returns, standardization, half-year windows.

use crate::fmath;
use crate::market::ExchangeDataset;
use crate::time::HalfYearWindow;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum ReturnsError {
    /// Bar interval must be a positive number of seconds.
    BadDeltaT,
    /// Fewer than two bars in every coverage interval.
    InsufficientData,
    /// All returns equal: zero standard deviation.
    DegenerateSeries,
}

impl fmt::Display for ReturnsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReturnsError::BadDeltaT => write!(f, "delta_t must be positive"),
            ReturnsError::InsufficientData => write!(f, "insufficient data"),
            ReturnsError::DegenerateSeries => write!(f, "degenerate series"),
        }
    }
}

impl core::error::Error for ReturnsError {}

/// Fixed-interval price series. Bars close at integer multiples of
/// `delta_t`; `segments` are index ranges of bars belonging to one coverage
/// interval (no bar interval straddles a coverage gap).
#[derive(Debug, Clone)]
pub struct BarSeries {
    pub delta_t: u64,
    /// Bar-close instants, Unix seconds.
    pub times: Vec<i64>,
    /// Last traded price in `(t − Δt, t]`, carried forward over empty bars.
    pub prices: Vec<f64>,
    /// Half-open `[start, end)` index ranges, one per emitted coverage interval.
    pub segments: Vec<(usize, usize)>,
    /// Coverage intervals shorter than `delta_t`, skipped.
    pub skipped_intervals: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReturnKind {
    Raw,
    Standardized,
}

/// Log-return series for one (exchange, Δt) pair or a slice of it.
#[derive(Debug, Clone)]
pub struct ReturnSeries {
    pub exchange_id: String,
    pub delta_t: u64,
    /// Bar-close instant of the later bar of each pair.
    pub times: Vec<i64>,
    pub values: Vec<f64>,
    pub kind: ReturnKind,
    /// Mean of the input (raw) returns, recorded on standardization.
    pub mu: Option<f64>,
    /// Sample standard deviation (n−1) of the input returns.
    pub sigma: Option<f64>,
    /// 1-based half-year window label, when the series is a window slice.
    pub window_id: Option<u32>,
}

/// Smallest bar index k with k·Δt ≥ t.
fn bar_index_at_or_after(t: f64, delta_t: u64) -> i64 {
    let dt = delta_t as f64;
    let mut k = fmath::ceil(t / dt) as i64;
    while (k - 1) as f64 * dt >= t {
        k -= 1;
    }
    while (k as f64) * dt < t {
        k += 1;
    }
    k
}

/// Largest bar index k with k·Δt ≤ t.
fn bar_index_at_or_before(t: f64, delta_t: u64) -> i64 {
    let dt = delta_t as f64;
    let mut k = fmath::floor(t / dt) as i64;
    while (k as f64) * dt > t {
        k -= 1;
    }
    while ((k + 1) as f64) * dt <= t {
        k += 1;
    }
    k
}

/// Resamples trades into `delta_t` bars, per coverage interval.
///
/// The first bar of an interval closes at the first multiple of `delta_t`
/// at or after the interval's first trade; bars continue (carrying the last
/// price forward) until the interval's last trade and, for coverage that
/// extends beyond it, until the last bar boundary inside the interval.
pub fn resample_bars(dataset: &ExchangeDataset, delta_t: u64) -> Result<BarSeries, ReturnsError> {
    if delta_t == 0 {
        return Err(ReturnsError::BadDeltaT);
    }
    let mut series = BarSeries {
        delta_t,
        times: Vec::new(),
        prices: Vec::new(),
        segments: Vec::new(),
        skipped_intervals: 0,
    };
    for (interval, trades) in dataset.coverage_slices() {
        if interval.end - interval.start < delta_t as f64 {
            series.skipped_intervals += 1;
            continue;
        }
        debug_assert!(!trades.is_empty());
        let k_first = bar_index_at_or_after(trades[0].timestamp, delta_t);
        let k_last_trade = bar_index_at_or_after(trades[trades.len() - 1].timestamp, delta_t);
        let k_last = k_last_trade.max(bar_index_at_or_before(interval.end, delta_t));
        let seg_start = series.times.len();
        let mut idx = 0usize;
        let mut price = trades[0].price;
        for k in k_first..=k_last {
            let close = k * delta_t as i64;
            while idx < trades.len() && trades[idx].timestamp <= close as f64 {
                price = trades[idx].price;
                idx += 1;
            }
            series.times.push(close);
            series.prices.push(price);
        }
        series.segments.push((seg_start, series.times.len()));
    }
    Ok(series)
}

/// Raw log-returns `ln P_t − ln P_{t−Δt}` over consecutive bars, never
/// spanning a coverage boundary.
pub fn log_returns(bars: &BarSeries, exchange_id: &str) -> Result<ReturnSeries, ReturnsError> {
    let mut times = Vec::new();
    let mut values = Vec::new();
    for &(start, end) in &bars.segments {
        if end - start < 2 {
            continue;
        }
        let mut prev_ln = fmath::ln(bars.prices[start]);
        for i in start + 1..end {
            let cur_ln = fmath::ln(bars.prices[i]);
            times.push(bars.times[i]);
            values.push(cur_ln - prev_ln);
            prev_ln = cur_ln;
        }
    }
    if values.is_empty() {
        return Err(ReturnsError::InsufficientData);
    }
    Ok(ReturnSeries {
        exchange_id: String::from(exchange_id),
        delta_t: bars.delta_t,
        times,
        values,
        kind: ReturnKind::Raw,
        mu: None,
        sigma: None,
        window_id: None,
    })
}

fn mean_and_sample_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, fmath::sqrt(ss / (n - 1.0)))
}

/// Centers and rescales to sample mean 0 and sample standard deviation 1.
pub fn standardize(series: &ReturnSeries) -> Result<ReturnSeries, ReturnsError> {
    if series.values.len() < 2 {
        return Err(ReturnsError::InsufficientData);
    }
    let (mu, sigma) = mean_and_sample_sd(&series.values);
    if !(sigma > 0.0) {
        return Err(ReturnsError::DegenerateSeries);
    }
    Ok(ReturnSeries {
        exchange_id: series.exchange_id.clone(),
        delta_t: series.delta_t,
        times: series.times.clone(),
        values: series.values.iter().map(|v| (v - mu) / sigma).collect(),
        kind: ReturnKind::Standardized,
        mu: Some(mu),
        sigma: Some(sigma),
        window_id: series.window_id,
    })
}

/// Removes exact-zero returns (those produced by carried-forward prices).
pub fn drop_zero_returns(series: &ReturnSeries) -> ReturnSeries {
    let mut out = series.clone();
    let keep: Vec<usize> = (0..series.values.len())
        .filter(|&i| series.values[i] != 0.0)
        .collect();
    out.times = keep.iter().map(|&i| series.times[i]).collect();
    out.values = keep.iter().map(|&i| series.values[i]).collect();
    out
}

/// Splits a raw series into half-year windows by bar-close instant and
/// standardizes each emitted slice. Windows without enough data (or with
/// zero variance) yield `None`.
pub fn window_split(
    series: &ReturnSeries,
    windows: &[HalfYearWindow],
) -> Vec<(HalfYearWindow, Option<ReturnSeries>)> {
    windows
        .iter()
        .map(|&w| {
            let idx: Vec<usize> = (0..series.times.len())
                .filter(|&i| w.contains(series.times[i]))
                .collect();
            let slice = ReturnSeries {
                exchange_id: series.exchange_id.clone(),
                delta_t: series.delta_t,
                times: idx.iter().map(|&i| series.times[i]).collect(),
                values: idx.iter().map(|&i| series.values[i]).collect(),
                kind: series.kind,
                mu: None,
                sigma: None,
                window_id: Some(w.index),
            };
            (w, standardize(&slice).ok())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::ingest_str;
    use crate::time::half_year_windows;
    use alloc::format;
    use alloc::vec;

    fn dataset(body: &str) -> ExchangeDataset {
        ingest_str("test", body, 86_400.0).unwrap().0
    }

    #[test]
    fn bars_close_on_grid() {
        let ds = dataset("10,100,1\n70,110,1\n");
        let bars = resample_bars(&ds, 60).unwrap();
        assert_eq!(bars.times, vec![60, 120]);
        assert_eq!(bars.prices, vec![100.0, 110.0]);
        assert_eq!(bars.segments, vec![(0, 2)]);
    }

    #[test]
    fn carry_forward_fills_quiet_bars() {
        // Single trade, then silence over the rest of the covered span:
        // every bar repeats that price.
        let ds = ExchangeDataset {
            exchange_id: String::from("test"),
            trades: vec![crate::market::Trade {
                timestamp: 10.0,
                price: 42.0,
                quantity: 1.0,
            }],
            coverage: vec![crate::market::CoverageInterval { start: 0.0, end: 330.0 }],
        };
        let bars = resample_bars(&ds, 60).unwrap();
        assert_eq!(bars.times, vec![60, 120, 180, 240, 300]);
        assert!(bars.prices.iter().all(|&p| p == 42.0));
    }

    #[test]
    fn short_intervals_are_skipped() {
        let ds = dataset("10,100,1\n20,110,1\n");
        let bars = resample_bars(&ds, 60).unwrap();
        assert_eq!(bars.times.len(), 0);
        assert_eq!(bars.skipped_intervals, 1);
        assert!(matches!(resample_bars(&ds, 0), Err(ReturnsError::BadDeltaT)));
    }

    #[test]
    fn boundary_trade_belongs_to_closing_bar() {
        // A trade exactly at t = 120 lies in the bar (60, 120].
        let ds = dataset("60,100,1\n120,111,1\n");
        let bars = resample_bars(&ds, 60).unwrap();
        assert_eq!(bars.times, vec![60, 120]);
        assert_eq!(bars.prices, vec![100.0, 111.0]);
    }

    #[test]
    fn bar_count_matches_boundary_scan() {
        // Pseudo-Poisson arrivals; oracle counts bar boundaries by scanning.
        let mut rng = crate::rng::Xoshiro256PlusPlus::seed_from_u64(77);
        let mut t = 0.0f64;
        let mut body = alloc::string::String::new();
        let mut stamps = vec![];
        for _ in 0..20_000 {
            t += -fmath::ln(rng.unit_open_closed()) * 40.0; // mean 40 s spacing
            stamps.push(t);
            body.push_str(&format!("{t},100,1\n"));
        }
        let ds = dataset(&body);
        assert_eq!(ds.coverage.len(), 1);
        let dt = 300u64;
        let bars = resample_bars(&ds, dt).unwrap();
        // oracle: number of multiples of dt in [ceil(first), ceil(last)]
        let first = stamps[0];
        let last = *stamps.last().unwrap();
        let k0 = (first / dt as f64).ceil() as i64;
        let k1 = (last / dt as f64).ceil() as i64;
        assert_eq!(bars.times.len() as i64, k1 - k0 + 1);
    }

    #[test]
    fn log_return_values() {
        let ds = dataset("60,100,1\n120,100,1\n180,200,1\n240,100,1\n");
        let bars = resample_bars(&ds, 60).unwrap();
        let r = log_returns(&bars, "test").unwrap();
        assert_eq!(r.values.len(), 3);
        assert!(fmath::abs(r.values[0]) < 1e-15);
        assert!(fmath::abs(r.values[1] - core::f64::consts::LN_2) < 1e-15);
        assert!(fmath::abs(r.values[2] + core::f64::consts::LN_2) < 1e-15);
        // telescoping
        let sum: f64 = r.values.iter().sum();
        assert!(fmath::abs(sum) < 1e-15);
    }

    #[test]
    fn insufficient_bars_error() {
        let ds = dataset("10,100,1\n100,110,1\n");
        let bars = resample_bars(&ds, 60).unwrap();
        assert_eq!(bars.times.len(), 2);
        let one_bar = BarSeries {
            delta_t: 60,
            times: vec![60],
            prices: vec![100.0],
            segments: vec![(0, 1)],
            skipped_intervals: 0,
        };
        assert!(matches!(
            log_returns(&one_bar, "test"),
            Err(ReturnsError::InsufficientData)
        ));
    }

    fn raw_series(values: &[f64]) -> ReturnSeries {
        ReturnSeries {
            exchange_id: String::from("test"),
            delta_t: 60,
            times: (0..values.len()).map(|i| (i as i64 + 1) * 60).collect(),
            values: values.into(),
            kind: ReturnKind::Raw,
            mu: None,
            sigma: None,
            window_id: None,
        }
    }

    #[test]
    fn standardize_two_point_case() {
        let out = standardize(&raw_series(&[-1.0, 1.0])).unwrap();
        // sample convention: sd of {-1, 1} is √2, so outputs are ∓1/√2
        let e = 1.0 / fmath::sqrt(2.0);
        assert!(fmath::abs(out.values[0] + e) < 1e-15);
        assert!(fmath::abs(out.values[1] - e) < 1e-15);
        assert_eq!(out.mu, Some(0.0));
        assert!(fmath::abs(out.sigma.unwrap() - fmath::sqrt(2.0)) < 1e-15);
    }

    #[test]
    fn standardize_affine_invariance() {
        let base = raw_series(&[0.4, -0.2, 0.9, -1.3, 0.05, 0.7]);
        let out1 = standardize(&base).unwrap();
        let shifted = raw_series(
            &base.values.iter().map(|v| 3.5 * v + 0.77).collect::<Vec<_>>(),
        );
        let out2 = standardize(&shifted).unwrap();
        for (a, b) in out1.values.iter().zip(&out2.values) {
            assert!(fmath::abs(a - b) < 1e-12);
        }
    }

    #[test]
    fn standardize_rejects_degenerate() {
        assert!(matches!(
            standardize(&raw_series(&[0.5, 0.5, 0.5])),
            Err(ReturnsError::DegenerateSeries)
        ));
        assert!(matches!(
            standardize(&raw_series(&[0.5])),
            Err(ReturnsError::InsufficientData)
        ));
    }

    #[test]
    fn standardize_large_sample_moments() {
        let mut rng = crate::rng::Xoshiro256PlusPlus::seed_from_u64(3);
        let vals: Vec<f64> = (0..100_000)
            .map(|_| {
                // sum of 12 uniforms minus 6: near-Gaussian, irrelevant here
                (0..12).map(|_| rng.unit_half_open()).sum::<f64>() - 6.0
            })
            .collect();
        let out = standardize(&raw_series(&vals)).unwrap();
        // two-pass oracle on the output
        let (m, s) = mean_and_sample_sd(&out.values);
        assert!(fmath::abs(m) < 1e-9);
        assert!(fmath::abs(s - 1.0) < 1e-9);
        // fixed point: standardizing again changes nothing beyond 1e-12
        let again = standardize(&out).unwrap();
        for (a, b) in out.values.iter().zip(&again.values) {
            assert!(fmath::abs(a - b) < 1e-12);
        }
    }

    #[test]
    fn window_split_assigns_by_close_instant() {
        let windows = half_year_windows((2012, 1), (2013, 1));
        assert_eq!(windows.len(), 2);
        let w0 = windows[0];
        // 40 returns inside window 1, none in window 2
        let n = 40usize;
        let series = ReturnSeries {
            exchange_id: String::from("test"),
            delta_t: 3600,
            times: (0..n).map(|i| w0.start + 3600 * (i as i64 + 1)).collect(),
            values: (0..n).map(|i| ((i * 37 + 11) % 17) as f64 / 17.0 - 0.5).collect(),
            kind: ReturnKind::Raw,
            mu: None,
            sigma: None,
            window_id: None,
        };
        let split = window_split(&series, &windows);
        assert_eq!(split.len(), 2);
        let s0 = split[0].1.as_ref().unwrap();
        assert_eq!(s0.values.len(), n);
        assert_eq!(s0.window_id, Some(1));
        assert_eq!(s0.kind, ReturnKind::Standardized);
        assert!(split[1].1.is_none());
    }

    #[test]
    fn window_counts_match_direct_filter() {
        let windows = half_year_windows((2011, 2), (2014, 2));
        let mut rng = crate::rng::Xoshiro256PlusPlus::seed_from_u64(12);
        let lo = windows[0].start;
        let hi = windows.last().unwrap().end;
        let n = 5000;
        let mut times: Vec<i64> = (0..n)
            .map(|_| lo + (rng.unit_half_open() * (hi - lo) as f64) as i64)
            .collect();
        times.sort_unstable();
        let series = ReturnSeries {
            exchange_id: String::from("test"),
            delta_t: 300,
            times: times.clone(),
            values: times.iter().map(|&t| (t % 1000) as f64 / 1000.0 - 0.5).collect(),
            kind: ReturnKind::Raw,
            mu: None,
            sigma: None,
            window_id: None,
        };
        let split = window_split(&series, &windows);
        for (w, slice) in &split {
            let expect = times.iter().filter(|&&t| t >= w.start && t < w.end).count();
            let got = slice.as_ref().map_or(0, |s| s.values.len());
            assert_eq!(got, expect, "window {}", w.index);
        }
    }

    #[test]
    fn drop_zero_returns_removes_only_zeros() {
        let s = raw_series(&[0.0, 0.5, 0.0, -0.2]);
        let d = drop_zero_returns(&s);
        assert_eq!(d.values, vec![0.5, -0.2]);
        assert_eq!(d.times.len(), 2);
    }

    #[test]
    fn return_count_identity() {
        // return count = bar count − number of intervals that produced bars
        let body = "10,100,1\n70,101,1\n130,99,1\n100000,50,1\n100060,51,1\n";
        let (ds, _) = ingest_str("test", body, 1000.0).unwrap();
        let bars = resample_bars(&ds, 60).unwrap();
        assert_eq!(bars.segments.len(), 2);
        let r = log_returns(&bars, "test").unwrap();
        assert_eq!(r.values.len(), bars.times.len() - bars.segments.len());
    }
}
