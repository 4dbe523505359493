//! Higher-level analyses over one or more exchange datasets: temporal
//! regression of windowed tail exponents, exponent–liquidity correlation,
//! and multi-Δt / multi-exchange estimation sweeps.

use crate::gof::{gof_test, GofConfig, GofResult, SeedPolicy};
use crate::market::{daily_activity, mean_daily_volume, ExchangeDataset};
use crate::returns::{
    drop_zero_returns, log_returns, resample_bars, standardize, window_split, ReturnSeries,
    ReturnsError,
};
use crate::rng::{derive_seed, fnv1a64};
use crate::stats::{ols_fit, pearson_test, CorrelationResult, RegressionResult, StatsError};
use crate::tail::{select_xmin, Estimator, FitConfig, Side, TailFit, TailSample};
use crate::time::HalfYearWindow;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum StudyError {
    /// No dataset produced usable returns at the requested interval.
    NoUsableData,
    /// Too few windows with valid fits to regress on.
    InsufficientWindows { side: Side, got: usize },
    /// Too few (exchange, window) cells with valid fits to correlate.
    InsufficientCells { side: Side, got: usize },
    Stats(StatsError),
}

impl fmt::Display for StudyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StudyError::NoUsableData => write!(f, "no usable return data"),
            StudyError::InsufficientWindows { side, got } => {
                write!(f, "insufficient windows for the {side} tail: {got}, need 3")
            }
            StudyError::InsufficientCells { side, got } => {
                write!(f, "insufficient cells for the {side} tail: {got}, need 3")
            }
            StudyError::Stats(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for StudyError {}

impl From<StatsError> for StudyError {
    fn from(e: StatsError) -> Self {
        StudyError::Stats(e)
    }
}

/// Shared knobs for the study drivers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyConfig {
    pub fit: FitConfig,
    pub gof: GofConfig,
    pub master_seed: u64,
    /// Estimator used for the temporal and liquidity studies.
    pub estimator: Estimator,
    pub drop_zero_returns: bool,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            fit: FitConfig::default(),
            gof: GofConfig::default(),
            master_seed: 0,
            estimator: Estimator::Hill,
            drop_zero_returns: false,
        }
    }
}

impl StudyConfig {
    fn seed_for(&self, label: &str) -> SeedPolicy {
        SeedPolicy::new(derive_seed(self.master_seed, fnv1a64(label.as_bytes())))
    }
}

/// Seed stream for one estimation cell. The sweep driver and the CLI both
/// derive replicate seeds through this, so their p-values agree exactly.
pub fn cell_seed(
    master_seed: u64,
    unit: &str,
    delta_t: u64,
    side: Side,
    estimator: Estimator,
) -> SeedPolicy {
    let label = format!("cell/{unit}/{delta_t}/{side}/{estimator}");
    SeedPolicy::new(derive_seed(master_seed, fnv1a64(label.as_bytes())))
}

/// Raw per-exchange returns at one interval; exchanges that cannot produce
/// returns are skipped with a note.
fn raw_returns_per_exchange(
    datasets: &[ExchangeDataset],
    delta_t: u64,
    cfg: &StudyConfig,
) -> (Vec<ReturnSeries>, Vec<(String, String)>) {
    let mut series = Vec::new();
    let mut skipped = Vec::new();
    for ds in datasets {
        let raw = resample_bars(ds, delta_t)
            .and_then(|bars| log_returns(&bars, &ds.exchange_id))
            .map(|r| {
                if cfg.drop_zero_returns {
                    drop_zero_returns(&r)
                } else {
                    r
                }
            });
        match raw {
            Ok(r) if r.values.len() >= 2 => series.push(r),
            Ok(_) => skipped.push((ds.exchange_id.clone(), ReturnsError::InsufficientData.to_string())),
            Err(e) => skipped.push((ds.exchange_id.clone(), e.to_string())),
        }
    }
    (series, skipped)
}

/// One fitted window of the temporal study.
#[derive(Debug, Clone)]
pub struct WindowFit {
    pub window: HalfYearWindow,
    pub side: Side,
    pub n_returns: usize,
    pub fit: TailFit,
    pub gof: GofResult,
}

#[derive(Debug, Clone)]
pub struct TemporalSideStudy {
    pub side: Side,
    /// OLS of α̂_t on the window index t.
    pub regression: RegressionResult,
    pub fits: Vec<WindowFit>,
    /// (window index, reason) for windows without a valid fit.
    pub skipped: Vec<(u32, String)>,
}

#[derive(Debug, Clone)]
pub struct TemporalStudy {
    pub delta_t: u64,
    pub sides: Vec<TemporalSideStudy>,
    /// (exchange, reason) for exchanges contributing no returns.
    pub skipped_exchanges: Vec<(String, String)>,
}

/// Pools per-window standardized returns across exchanges, fits each tail
/// per window, tests it, and regresses the exponent on the window index.
pub fn temporal_study(
    datasets: &[ExchangeDataset],
    delta_t: u64,
    windows: &[HalfYearWindow],
    cfg: &StudyConfig,
) -> Result<TemporalStudy, StudyError> {
    let (series, skipped_exchanges) = raw_returns_per_exchange(datasets, delta_t, cfg);
    if series.is_empty() {
        return Err(StudyError::NoUsableData);
    }
    // standardized slice per (exchange, window), pooled across exchanges
    let mut pooled: Vec<Vec<f64>> = windows.iter().map(|_| Vec::new()).collect();
    for s in &series {
        for (k, (_, slice)) in window_split(s, windows).into_iter().enumerate() {
            if let Some(slice) = slice {
                pooled[k].extend_from_slice(&slice.values);
            }
        }
    }

    let mut sides = Vec::new();
    for side in Side::BOTH {
        let mut fits: Vec<WindowFit> = Vec::new();
        let mut skipped: Vec<(u32, String)> = Vec::new();
        for (k, w) in windows.iter().enumerate() {
            let outcome = TailSample::new(side, side_values(&pooled[k], side))
                .and_then(|sample| {
                    select_xmin(&sample, cfg.estimator, &cfg.fit).map(|fit| (sample, fit))
                });
            let (sample, fit) = match outcome {
                Ok(v) => v,
                Err(e) => {
                    skipped.push((w.index, e.to_string()));
                    continue;
                }
            };
            let policy = cfg.seed_for(&format!("temporal/{}/{}", w.index, side));
            match gof_test(&fit, &cfg.gof, policy) {
                Ok(gof) => fits.push(WindowFit {
                    window: *w,
                    side,
                    n_returns: sample.len(),
                    fit,
                    gof,
                }),
                Err(e) => skipped.push((w.index, e.to_string())),
            }
        }
        if fits.len() < 3 {
            return Err(StudyError::InsufficientWindows {
                side,
                got: fits.len(),
            });
        }
        let ts: Vec<f64> = fits.iter().map(|f| f.window.index as f64).collect();
        let alphas: Vec<f64> = fits.iter().map(|f| f.fit.alpha).collect();
        let regression = ols_fit(&ts, &alphas)?;
        sides.push(TemporalSideStudy {
            side,
            regression,
            fits,
            skipped,
        });
    }
    Ok(TemporalStudy {
        delta_t,
        sides,
        skipped_exchanges,
    })
}

fn side_values(pooled: &[f64], side: Side) -> Vec<f64> {
    match side {
        Side::Positive => pooled.iter().copied().filter(|&v| v > 0.0).collect(),
        Side::Negative => pooled.iter().filter(|&&v| v < 0.0).map(|&v| -v).collect(),
    }
}

/// One (exchange, half-year window) liquidity cell.
#[derive(Debug, Clone)]
pub struct LiquidityCell {
    pub exchange_id: String,
    pub window_index: u32,
    pub side: Side,
    pub alpha: f64,
    /// Mean daily traded USD volume within the window.
    pub volume: f64,
}

#[derive(Debug, Clone)]
pub struct LiquiditySideStudy {
    pub side: Side,
    pub correlation: CorrelationResult,
}

#[derive(Debug, Clone)]
pub struct LiquidityStudy {
    pub delta_t: u64,
    pub sides: Vec<LiquiditySideStudy>,
    pub cells: Vec<LiquidityCell>,
    /// (exchange, window, reason) for cells without a valid fit.
    pub dropped: Vec<(String, u32, String)>,
}

/// Per-(exchange, window) tail exponents against mean daily USD volume,
/// correlated per side.
pub fn liquidity_study(
    datasets: &[ExchangeDataset],
    delta_t: u64,
    windows: &[HalfYearWindow],
    cfg: &StudyConfig,
) -> Result<LiquidityStudy, StudyError> {
    let mut cells: Vec<LiquidityCell> = Vec::new();
    let mut dropped: Vec<(String, u32, String)> = Vec::new();
    let (series, skipped) = raw_returns_per_exchange(datasets, delta_t, cfg);
    if series.is_empty() {
        return Err(StudyError::NoUsableData);
    }
    for (ds_idx, s) in series.iter().enumerate() {
        let ds = datasets
            .iter()
            .find(|d| d.exchange_id == s.exchange_id)
            .unwrap_or(&datasets[ds_idx]);
        let activity = daily_activity(ds);
        for (w, slice) in window_split(s, windows) {
            let Some(slice) = slice else { continue };
            let Some(volume) = mean_daily_volume(&activity, w.start, w.end) else {
                dropped.push((s.exchange_id.clone(), w.index, "no covered days".to_string()));
                continue;
            };
            for side in Side::BOTH {
                let fit = TailSample::from_returns(&slice, side)
                    .and_then(|sample| select_xmin(&sample, cfg.estimator, &cfg.fit));
                match fit {
                    Ok(fit) => cells.push(LiquidityCell {
                        exchange_id: s.exchange_id.clone(),
                        window_index: w.index,
                        side,
                        alpha: fit.alpha,
                        volume,
                    }),
                    Err(e) => dropped.push((s.exchange_id.clone(), w.index, e.to_string())),
                }
            }
        }
    }
    let mut sides = Vec::new();
    for side in Side::BOTH {
        let volumes: Vec<f64> = cells
            .iter()
            .filter(|c| c.side == side)
            .map(|c| c.volume)
            .collect();
        let alphas: Vec<f64> = cells
            .iter()
            .filter(|c| c.side == side)
            .map(|c| c.alpha)
            .collect();
        if volumes.len() < 3 {
            return Err(StudyError::InsufficientCells {
                side,
                got: volumes.len(),
            });
        }
        let correlation = pearson_test(&volumes, &alphas)?;
        sides.push(LiquiditySideStudy { side, correlation });
    }
    let _ = skipped;
    Ok(LiquidityStudy {
        delta_t,
        sides,
        cells,
        dropped,
    })
}

/// One attempted (exchange, Δt, side, estimator) estimation cell. Failures
/// are recorded in place and never abort the sweep.
#[derive(Debug, Clone)]
pub struct SweepCell {
    pub exchange_id: String,
    pub delta_t: u64,
    pub side: Side,
    pub estimator: Estimator,
    /// Standardized returns feeding the cell (0 when the pipeline failed).
    pub n_returns: usize,
    pub fit: Result<TailFit, String>,
    pub gof: Option<Result<GofResult, String>>,
}

impl SweepCell {
    /// Power-law plausibility at the configured confidence, when tested.
    pub fn plausible(&self) -> Option<bool> {
        match &self.gof {
            Some(Ok(g)) => Some(g.plausible()),
            _ => None,
        }
    }
}

/// Fits and tests every requested combination. In aggregate mode the
/// per-exchange standardized series are pooled into one "aggregate" unit
/// per Δt before fitting.
pub fn sweep(
    datasets: &[ExchangeDataset],
    delta_ts: &[u64],
    estimators: &[Estimator],
    sides: &[Side],
    aggregate: bool,
    cfg: &StudyConfig,
) -> Vec<SweepCell> {
    let mut cells = Vec::new();
    for &dt in delta_ts {
        let (series, skipped) = raw_returns_per_exchange(datasets, dt, cfg);
        let mut units: Vec<(String, Vec<f64>)> = Vec::new();
        let mut failed_units: Vec<(String, String)> = skipped;
        for s in &series {
            match standardize(s) {
                Ok(std_series) => units.push((s.exchange_id.clone(), std_series.values)),
                Err(e) => failed_units.push((s.exchange_id.clone(), e.to_string())),
            }
        }
        if aggregate {
            let mut pooled = Vec::new();
            for (_, values) in &units {
                pooled.extend_from_slice(values);
            }
            units = alloc::vec![(String::from("aggregate"), pooled)];
        }
        for (unit, values) in &units {
            for &side in sides {
                for &estimator in estimators {
                    let fit = TailSample::new(side, side_values(values, side))
                        .and_then(|sample| select_xmin(&sample, estimator, &cfg.fit));
                    let (fit, gof) = match fit {
                        Ok(fit) => {
                            let policy = cell_seed(cfg.master_seed, unit, dt, side, estimator);
                            let gof = gof_test(&fit, &cfg.gof, policy)
                                .map_err(|e| e.to_string());
                            (Ok(fit), Some(gof))
                        }
                        Err(e) => (Err(e.to_string()), None),
                    };
                    cells.push(SweepCell {
                        exchange_id: unit.clone(),
                        delta_t: dt,
                        side,
                        estimator,
                        n_returns: values.len(),
                        fit,
                        gof,
                    });
                }
            }
        }
        // record pipeline-level failures as error cells so the sweep shape
        // is predictable for every requested combination
        if !aggregate {
            for (unit, reason) in &failed_units {
                for &side in sides {
                    for &estimator in estimators {
                        cells.push(SweepCell {
                            exchange_id: unit.clone(),
                            delta_t: dt,
                            side,
                            estimator,
                            n_returns: 0,
                            fit: Err(reason.clone()),
                            gof: None,
                        });
                    }
                }
            }
        }
    }
    cells.sort_by(|a, b| {
        (&a.exchange_id, a.delta_t, a.side, a.estimator).cmp(&(
            &b.exchange_id,
            b.delta_t,
            b.side,
            b.estimator,
        ))
    });
    cells
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::ingest_str;
    use crate::rng::Xoshiro256PlusPlus;
    use crate::time::half_year_windows;
    use alloc::string::String;

    /// Synthetic trade CSV whose bar returns mix a uniform body with
    /// two-sided Pareto tails of known exponent.
    fn synthetic_body(
        alpha: f64,
        n_bars: usize,
        start_ts: i64,
        delta_t: u64,
        seed: u64,
    ) -> String {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        let mut price = 1000.0f64;
        let mut out = String::new();
        let tail_cutoff = 0.004;
        for k in 0..n_bars {
            let u = rng.unit_half_open();
            let r = if u < 0.7 {
                (rng.unit_half_open() - 0.5) * tail_cutoff
            } else {
                let mag = crate::gof::pareto_transform(
                    rng.unit_open_closed(),
                    alpha,
                    tail_cutoff,
                );
                if rng.next_u64() & 1 == 0 {
                    mag
                } else {
                    -mag
                }
            };
            price *= crate::fmath::exp(r.clamp(-0.5, 0.5));
            let t = start_ts + (k as i64 + 1) * delta_t as i64;
            out.push_str(&format!("{t},{price},1\n"));
        }
        out
    }

    fn quick_cfg(seed: u64) -> StudyConfig {
        StudyConfig {
            fit: FitConfig {
                n_min: 50,
                max_candidates: 400,
            },
            gof: GofConfig {
                replicates: 100,
                confidence: 0.95,
                refit_xmin: false,
                fit: FitConfig {
                    n_min: 50,
                    max_candidates: 400,
                },
            },
            master_seed: seed,
            estimator: Estimator::Hill,
            drop_zero_returns: false,
        }
    }

    #[test]
    fn temporal_study_fits_every_window() {
        let windows = half_year_windows((2012, 1), (2014, 1));
        assert_eq!(windows.len(), 4);
        let start = windows[0].start;
        let span = (windows[3].end - start) as usize;
        let dt = 3600u64;
        let n_bars = span / dt as usize - 1;
        let body = synthetic_body(2.5, n_bars, start, dt, 42);
        let (ds, _) = ingest_str("synth", &body, 86_400.0).unwrap();
        let study = temporal_study(&[ds], dt, &windows, &quick_cfg(7)).unwrap();
        assert_eq!(study.sides.len(), 2);
        for side in &study.sides {
            assert_eq!(side.fits.len(), 4, "skipped: {:?}", side.skipped);
            assert_eq!(side.regression.n, 4);
            for f in &side.fits {
                assert!(f.fit.alpha > 1.0 && f.fit.alpha < 4.5);
                assert_eq!(f.gof.replicates, 100);
            }
        }
    }

    #[test]
    fn temporal_study_requires_three_windows() {
        let windows = half_year_windows((2012, 1), (2013, 1));
        assert_eq!(windows.len(), 2);
        let start = windows[0].start;
        let dt = 3600u64;
        let n_bars = ((windows[1].end - start) / dt as i64) as usize - 1;
        let body = synthetic_body(2.5, n_bars, start, dt, 4);
        let (ds, _) = ingest_str("synth", &body, 86_400.0).unwrap();
        assert!(matches!(
            temporal_study(&[ds], dt, &windows, &quick_cfg(1)),
            Err(StudyError::InsufficientWindows { got: 2, .. })
        ));
    }

    #[test]
    fn liquidity_study_builds_cells_per_exchange_window() {
        let windows = half_year_windows((2012, 1), (2014, 1));
        let start = windows[0].start;
        let span = (windows[3].end - start) as usize;
        let dt = 3600u64;
        let n_bars = span / dt as usize - 1;
        let a = ingest_str("ex_a", &synthetic_body(2.5, n_bars, start, dt, 1), 86_400.0)
            .unwrap()
            .0;
        let b = ingest_str("ex_b", &synthetic_body(2.2, n_bars, start, dt, 2), 86_400.0)
            .unwrap()
            .0;
        let study = liquidity_study(&[a, b], dt, &windows, &quick_cfg(3)).unwrap();
        // 2 exchanges × 4 windows × 2 sides
        assert_eq!(study.cells.len(), 16, "dropped: {:?}", study.dropped);
        assert_eq!(study.sides.len(), 2);
        for s in &study.sides {
            assert_eq!(s.correlation.n, 8);
            assert!(s.correlation.r.abs() <= 1.0);
        }
    }

    #[test]
    fn liquidity_study_rejects_constant_volume() {
        // Power-of-two prices with reciprocal power-of-two quantities make
        // every trade worth exactly 1.0 USD in f64, so each covered day's
        // volume is exactly equal and the volume coordinate has zero
        // variance. One trade per day; exponent jumps of ±{1,2,3} octaves
        // give the tails enough spread for Hill fits.
        let windows = half_year_windows((2012, 1), (2014, 1));
        let start = windows[0].start;
        let days = (windows[3].end - start) / 86_400;
        let steps: [i32; 6] = [1, -2, 3, -1, 2, -3];
        let mut exponent = 0i32;
        let mut body = String::new();
        for d in 0..days {
            exponent += steps[(d % 6) as usize];
            let price = (2.0f64).powi(exponent);
            let quantity = (2.0f64).powi(-exponent);
            let t = start + d * 86_400;
            body.push_str(&format!("{t},{price},{quantity}\n"));
        }
        let (ds, _) = ingest_str("flat", &body, 86_400.0).unwrap();
        let cfg = StudyConfig {
            fit: FitConfig {
                n_min: 30,
                max_candidates: 400,
            },
            ..quick_cfg(5)
        };
        assert!(matches!(
            liquidity_study(&[ds], 86_400, &windows, &cfg),
            Err(StudyError::Stats(StatsError::ZeroVariance))
        ));
    }

    #[test]
    fn sweep_counts_cells_and_survives_failures() {
        let windows = half_year_windows((2012, 1), (2013, 1));
        let start = windows[0].start;
        let dt = 3600u64;
        let n_bars = ((windows[1].end - start) / dt as i64) as usize - 1;
        let good = ingest_str("good", &synthetic_body(2.3, n_bars, start, dt, 6), 86_400.0)
            .unwrap()
            .0;
        // ten trades only: bar pipeline produces too little for any fit
        let tiny_body: String = (0..10)
            .map(|i| format!("{},100,1\n", start + i * 60))
            .collect();
        let tiny = ingest_str("tiny", &tiny_body, 86_400.0).unwrap().0;
        let cells = sweep(
            &[good, tiny],
            &[dt],
            &Estimator::ALL,
            &Side::BOTH,
            false,
            &quick_cfg(11),
        );
        // 2 exchanges × 1 Δt × 2 sides × 2 estimators
        assert_eq!(cells.len(), 8);
        let good_cells = cells.iter().filter(|c| c.exchange_id == "good");
        for c in good_cells {
            let fit = c.fit.as_ref().expect("good cells fit");
            assert!(fit.alpha > 1.0);
            assert!(c.gof.as_ref().unwrap().is_ok());
        }
        assert!(cells
            .iter()
            .filter(|c| c.exchange_id == "tiny")
            .all(|c| c.fit.is_err() && c.gof.is_none()));
        // deterministic ordering by (exchange, Δt, side, estimator)
        let mut keys: Vec<_> = cells
            .iter()
            .map(|c| (c.exchange_id.clone(), c.delta_t, c.side, c.estimator))
            .collect();
        let sorted = {
            let mut k = keys.clone();
            k.sort();
            k
        };
        assert_eq!(keys, sorted);
        keys.dedup();
        assert_eq!(keys.len(), cells.len());
    }

    #[test]
    fn sweep_single_cell_combination() {
        let windows = half_year_windows((2012, 1), (2013, 1));
        let start = windows[0].start;
        let dt = 60u64;
        let body = synthetic_body(2.3, 20_000, start, dt, 13);
        let ds = ingest_str("one", &body, 86_400.0).unwrap().0;
        let cells = sweep(
            &[ds],
            &[dt],
            &[Estimator::Hill],
            &Side::BOTH,
            false,
            &quick_cfg(17),
        );
        assert_eq!(cells.len(), 2);
    }

    #[test]
    fn aggregate_pools_before_fitting() {
        let windows = half_year_windows((2012, 1), (2013, 1));
        let start = windows[0].start;
        let dt = 3600u64;
        let n_bars = ((windows[1].end - start) / dt as i64) as usize - 1;
        let a = ingest_str("a", &synthetic_body(2.4, n_bars, start, dt, 21), 86_400.0)
            .unwrap()
            .0;
        let b = ingest_str("b", &synthetic_body(2.4, n_bars, start, dt, 22), 86_400.0)
            .unwrap()
            .0;
        let cells = sweep(
            &[a, b],
            &[dt],
            &[Estimator::Hill],
            &[Side::Positive],
            true,
            &quick_cfg(23),
        );
        assert_eq!(cells.len(), 1);
        assert_eq!(cells[0].exchange_id, "aggregate");
        let n_a = cells[0].n_returns;
        assert!(n_a > n_bars, "pooled {} returns", n_a);
    }

    #[test]
    fn sweep_is_reproducible() {
        let windows = half_year_windows((2012, 1), (2013, 1));
        let start = windows[0].start;
        let dt = 3600u64;
        let n_bars = ((windows[1].end - start) / dt as i64) as usize - 1;
        let ds = ingest_str("r", &synthetic_body(2.3, n_bars, start, dt, 31), 86_400.0)
            .unwrap()
            .0;
        let run = |ds: &ExchangeDataset| {
            sweep(
                core::slice::from_ref(ds),
                &[dt],
                &[Estimator::Hill],
                &Side::BOTH,
                false,
                &quick_cfg(37),
            )
        };
        let c1 = run(&ds);
        let c2 = run(&ds);
        for (a, b) in c1.iter().zip(&c2) {
            assert_eq!(a.fit.as_ref().unwrap(), b.fit.as_ref().unwrap());
            assert_eq!(
                a.gof.as_ref().unwrap().as_ref().unwrap().p_value,
                b.gof.as_ref().unwrap().as_ref().unwrap().p_value
            );
        }
    }
}
