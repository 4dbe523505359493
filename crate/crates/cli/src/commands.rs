//! Subcommand implementations. Each takes a merged [`RunConfig`], writes its
//! stamped output files under the configured directory, and returns the
//! paths it wrote.

use crate::config::RunConfig;
use crate::fixture::{write_fixture, FixtureSpec};
use crate::io::{load_all, OutFile};
use crate::report;
use crate::CliError;
use rayon::prelude::*;
use std::io::Write as _;
use std::path::PathBuf;
use tailfit_core::gof::{assemble_result, bonferroni_adjust, GofConfig, GofResult, GofRunner};
use tailfit_core::market::ExchangeDataset;
use tailfit_core::returns::{drop_zero_returns, log_returns, resample_bars, standardize, ReturnSeries};
use tailfit_core::studies::{cell_seed, liquidity_study, sweep, temporal_study, StudyConfig};
use tailfit_core::tail::{empirical_ccdf, select_xmin, Side, TailFit, TailSample};
use tailfit_core::time::{half_year_windows, windows_spanning, HalfYearWindow};

fn fit_config(cfg: &RunConfig) -> tailfit_core::tail::FitConfig {
    tailfit_core::tail::FitConfig {
        n_min: cfg.n_min,
        max_candidates: cfg.max_candidates,
    }
}

fn gof_config(cfg: &RunConfig) -> GofConfig {
    GofConfig {
        replicates: cfg.replicates,
        confidence: cfg.confidence,
        refit_xmin: cfg.refit_xmin,
        fit: fit_config(cfg),
    }
}

fn study_config(cfg: &RunConfig) -> StudyConfig {
    StudyConfig {
        fit: fit_config(cfg),
        gof: gof_config(cfg),
        master_seed: cfg.master_seed,
        estimator: cfg.estimators[0],
        drop_zero_returns: cfg.drop_zero_returns,
    }
}

/// Runs a closure inside a Rayon pool of the configured width (0 keeps the
/// global default pool).
pub fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    if threads == 0 {
        f()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool")
            .install(f)
    }
}

/// The standardized return series of one (exchange, Δt) pair, or the reason
/// it could not be built.
fn build_series(
    ds: &ExchangeDataset,
    delta_t: u64,
    cfg: &RunConfig,
) -> Result<ReturnSeries, String> {
    let bars = resample_bars(ds, delta_t).map_err(|e| e.to_string())?;
    let raw = log_returns(&bars, &ds.exchange_id).map_err(|e| e.to_string())?;
    let raw = if cfg.drop_zero_returns {
        drop_zero_returns(&raw)
    } else {
        raw
    };
    standardize(&raw).map_err(|e| e.to_string())
}

struct FittedCell {
    exchange: String,
    delta_t: u64,
    side: Side,
    estimator: tailfit_core::tail::Estimator,
    n_returns: usize,
    fit: Result<TailFit, String>,
}

/// select_xmin over every configured (exchange, Δt, side, estimator) cell.
fn fit_cells(datasets: &[ExchangeDataset], cfg: &RunConfig) -> Vec<FittedCell> {
    let mut cells = Vec::new();
    for ds in datasets {
        for &dt in &cfg.delta_ts {
            let series = build_series(ds, dt, cfg);
            for &side in &cfg.sides {
                let sample = series
                    .as_ref()
                    .map_err(Clone::clone)
                    .and_then(|s| TailSample::from_returns(s, side).map_err(|e| e.to_string()));
                for &estimator in &cfg.estimators {
                    let fit = sample.as_ref().map_err(Clone::clone).and_then(|sm| {
                        select_xmin(sm, estimator, &fit_config(cfg)).map_err(|e| e.to_string())
                    });
                    cells.push(FittedCell {
                        exchange: ds.exchange_id.clone(),
                        delta_t: dt,
                        side,
                        estimator,
                        n_returns: series.as_ref().map_or(0, |s| s.values.len()),
                        fit,
                    });
                }
            }
        }
    }
    cells
}

/// Replicates evaluated in parallel, assembled exactly as the sequential
/// test would: distances stay in replicate order and the p-value reduction
/// is a commutative count.
fn gof_parallel(
    fit: &TailFit,
    gof_cfg: &GofConfig,
    policy: tailfit_core::gof::SeedPolicy,
) -> Result<GofResult, String> {
    if gof_cfg.replicates < 100 {
        return Err(format!(
            "need at least 100 replicates, got {}",
            gof_cfg.replicates
        ));
    }
    if !(gof_cfg.confidence > 0.0 && gof_cfg.confidence < 1.0) {
        return Err(format!("confidence must be in (0,1), got {}", gof_cfg.confidence));
    }
    let runner = GofRunner::new(fit, gof_cfg, policy);
    let outcomes: Result<Vec<(f64, u32)>, _> = (0..gof_cfg.replicates)
        .into_par_iter()
        .map(|j| runner.replicate(j))
        .collect();
    let outcomes = outcomes.map_err(|e| e.to_string())?;
    let redraws = outcomes.iter().map(|o| o.1).sum();
    let distances = outcomes.into_iter().map(|o| o.0).collect();
    Ok(assemble_result(fit, gof_cfg, policy, distances, redraws))
}

pub fn run_ingest(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    in_pool(cfg.threads, || {
        let loaded = load_all(cfg)?;
        let mut out = OutFile::create(&cfg.out_dir, "ingest.txt", "ingest", cfg)?;
        for (_, report) in &loaded {
            out.line(report::ingest_record(report))?;
            for iv in &report.coverage {
                out.line(report::coverage_record(&report.exchange_id, iv.start, iv.end))?;
            }
            for err in &report.sample_errors {
                out.line(format!("note exchange={} error={err:?}", report.exchange_id))?;
            }
            println!(
                "{}: {} trades accepted, {} rejected, {} coverage interval(s)",
                report.exchange_id,
                report.accepted,
                report.rejected,
                report.coverage.len()
            );
        }
        Ok(vec![out.finish()?])
    })
}

pub fn run_fit(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    in_pool(cfg.threads, || {
        let loaded = load_all(cfg)?;
        let datasets: Vec<ExchangeDataset> = loaded.into_iter().map(|(d, _)| d).collect();
        let cells = fit_cells(&datasets, cfg);
        let mut out = OutFile::create(&cfg.out_dir, "fits.txt", "fit", cfg)?;
        for c in &cells {
            let line =
                report::fit_record(&c.exchange, c.delta_t, c.side, c.estimator, c.n_returns, &c.fit);
            println!("{line}");
            out.line(line)?;
        }
        Ok(vec![out.finish()?])
    })
}

pub fn run_gof(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    in_pool(cfg.threads, || {
        let loaded = load_all(cfg)?;
        let datasets: Vec<ExchangeDataset> = loaded.into_iter().map(|(d, _)| d).collect();
        let cells = fit_cells(&datasets, cfg);
        let gof_cfg = gof_config(cfg);
        let mut out = OutFile::create(&cfg.out_dir, "gof.txt", "gof", cfg)?;
        for c in &cells {
            match &c.fit {
                Ok(fit) => {
                    let policy =
                        cell_seed(cfg.master_seed, &c.exchange, c.delta_t, c.side, fit.estimator);
                    match gof_parallel(fit, &gof_cfg, policy) {
                        Ok(gof) => {
                            let line = report::gof_record(&c.exchange, c.delta_t, c.side, &gof);
                            println!("{line}");
                            out.line(line)?;
                        }
                        Err(e) => {
                            out.line(format!(
                                "gof exchange={} delta_t={} side={} estimator={} status=error reason={e:?}",
                                c.exchange, c.delta_t, c.side, fit.estimator
                            ))?;
                        }
                    }
                }
                Err(e) => {
                    out.line(format!(
                        "gof exchange={} delta_t={} side={} estimator={} status=error reason={e:?}",
                        c.exchange, c.delta_t, c.side, c.estimator
                    ))?;
                }
            }
        }
        Ok(vec![out.finish()?])
    })
}

pub fn run_sweep(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    in_pool(cfg.threads, || {
        let loaded = load_all(cfg)?;
        let datasets: Vec<ExchangeDataset> = loaded.into_iter().map(|(d, _)| d).collect();
        let cells = sweep(
            &datasets,
            &cfg.delta_ts,
            &cfg.estimators,
            &cfg.sides,
            cfg.aggregate,
            &study_config(cfg),
        );
        let mut csv = OutFile::create(&cfg.out_dir, "sweep.csv", "sweep", cfg)?;
        csv.line(report::SWEEP_CSV_HEADER)?;
        let mut points = OutFile::create(&cfg.out_dir, "sweep_points.txt", "sweep", cfg)?;
        let mut ok = 0usize;
        for cell in &cells {
            csv.line(report::sweep_csv_row(cell))?;
            if let Some(p) = report::sweep_point_record(cell) {
                points.line(p)?;
                ok += 1;
            }
        }
        println!("sweep: {} cells, {} fitted", cells.len(), ok);
        Ok(vec![csv.finish()?, points.finish()?])
    })
}

/// Half-year windows: explicit bounds when configured, otherwise derived
/// from the union of coverage spans.
fn resolve_windows(
    cfg: &RunConfig,
    datasets: &[ExchangeDataset],
) -> Result<Vec<HalfYearWindow>, CliError> {
    if let (Some(start), Some(end)) = (cfg.window_start, cfg.window_end) {
        let ws = half_year_windows(start, end);
        if ws.is_empty() {
            return Err(CliError::Usage("window range is empty".into()));
        }
        return Ok(ws);
    }
    let lo = datasets
        .iter()
        .filter_map(|d| d.coverage.first().map(|iv| iv.start))
        .fold(f64::INFINITY, f64::min);
    let hi = datasets
        .iter()
        .filter_map(|d| d.coverage.last().map(|iv| iv.end))
        .fold(f64::NEG_INFINITY, f64::max);
    if !(lo < hi) {
        return Err(CliError::Data("no coverage to derive windows from".into()));
    }
    Ok(windows_spanning(lo, hi))
}

pub fn run_windows(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    in_pool(cfg.threads, || {
        let loaded = load_all(cfg)?;
        let datasets: Vec<ExchangeDataset> = loaded.into_iter().map(|(d, _)| d).collect();
        let windows = resolve_windows(cfg, &datasets)?;
        let delta_t = cfg.delta_ts[0];
        let study_cfg = study_config(cfg);

        let temporal = temporal_study(&datasets, delta_t, &windows, &study_cfg)
            .map_err(|e| CliError::Data(e.to_string()))?;

        let mut csv = OutFile::create(&cfg.out_dir, "windows.csv", "windows", cfg)?;
        csv.line(
            "side,window,start,end,n_returns,alpha,stderr,xmin,n_tail,d_emp,p_value,plausible,bonferroni_reject",
        )?;
        let mut p_values = Vec::new();
        let mut rows = Vec::new();
        for side in &temporal.sides {
            for wf in &side.fits {
                p_values.push(wf.gof.p_value);
                rows.push((side.side, wf));
            }
        }
        let m = match cfg.bonferroni {
            Some(0) | None => p_values.len().max(1),
            Some(m) => m,
        };
        let bonferroni = cfg
            .bonferroni
            .map(|_| bonferroni_adjust(&p_values, m, cfg.confidence));
        for (i, (side, wf)) in rows.iter().enumerate() {
            let bf = bonferroni
                .as_ref()
                .map_or_else(String::new, |b| b[i].to_string());
            csv.line(format!(
                "{side},{},{},{},{},{},{},{},{},{},{},{},{bf}",
                wf.window.index,
                tailfit_core::time::format_instant(wf.window.start as f64),
                tailfit_core::time::format_instant(wf.window.end as f64),
                wf.n_returns,
                wf.fit.alpha,
                wf.fit.stderr.map_or_else(String::new, |s| s.to_string()),
                wf.fit.xmin,
                wf.fit.n,
                wf.gof.d_emp,
                wf.gof.p_value,
                wf.gof.plausible(),
            ))?;
        }

        let mut summary = OutFile::create(&cfg.out_dir, "windows_summary.txt", "windows", cfg)?;
        for side in &temporal.sides {
            let line = report::regression_record(side.side, &side.regression);
            println!("{line}");
            summary.line(line)?;
            for (w, reason) in &side.skipped {
                summary.line(format!(
                    "note side={} window={w} skipped reason={reason:?}",
                    side.side
                ))?;
            }
        }
        for (exchange, reason) in &temporal.skipped_exchanges {
            summary.line(format!("note exchange={exchange} skipped reason={reason:?}"))?;
        }
        if let Some(b) = &bonferroni {
            let rejected = b.iter().filter(|&&r| r).count();
            let line = format!(
                "bonferroni m={m} threshold={} unadjusted_rejections={} adjusted_rejections={rejected}",
                (1.0 - cfg.confidence) / m as f64,
                p_values
                    .iter()
                    .filter(|&&p| p < 1.0 - cfg.confidence)
                    .count(),
            );
            println!("{line}");
            summary.line(line)?;
        }

        let mut cells_csv = OutFile::create(&cfg.out_dir, "windows_cells.csv", "windows", cfg)?;
        cells_csv.line("exchange,window,side,alpha,volume")?;
        match liquidity_study(&datasets, delta_t, &windows, &study_cfg) {
            Ok(liquidity) => {
                for side in &liquidity.sides {
                    let line = report::correlation_record(side.side, &side.correlation);
                    println!("{line}");
                    summary.line(line)?;
                }
                for c in &liquidity.cells {
                    cells_csv.line(format!(
                        "{},{},{},{},{}",
                        c.exchange_id, c.window_index, c.side, c.alpha, c.volume
                    ))?;
                }
                for (exchange, window, reason) in &liquidity.dropped {
                    summary.line(format!(
                        "note exchange={exchange} window={window} cell dropped reason={reason:?}"
                    ))?;
                }
            }
            Err(e) => {
                let line = format!("liquidity status=error reason={:?}", e.to_string());
                println!("{line}");
                summary.line(line)?;
            }
        }

        Ok(vec![
            csv.finish()?,
            summary.finish()?,
            cells_csv.finish()?,
        ])
    })
}

pub fn run_ccdf(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    in_pool(cfg.threads, || {
        let loaded = load_all(cfg)?;
        let datasets: Vec<ExchangeDataset> = loaded.into_iter().map(|(d, _)| d).collect();
        let estimator = cfg.estimators[0];
        let mut written = Vec::new();
        for ds in &datasets {
            for &dt in &cfg.delta_ts {
                let series = match build_series(ds, dt, cfg) {
                    Ok(s) => s,
                    Err(e) => {
                        eprintln!("ccdf {} at {dt}s skipped: {e}", ds.exchange_id);
                        continue;
                    }
                };
                for &side in &cfg.sides {
                    let Ok(sample) = TailSample::from_returns(&series, side) else {
                        continue;
                    };
                    let points = empirical_ccdf(&sample);
                    let stem = format!("ccdf_{}_{dt}s_{side}", ds.exchange_id);

                    let mut emp =
                        OutFile::create(&cfg.out_dir, &format!("{stem}.emp.txt"), "ccdf", cfg)?;
                    for (x, q) in points.xs.iter().zip(&points.ccdf) {
                        emp.line(format!("{x} {q}"))?;
                    }
                    written.push(emp.finish()?);

                    let mut norm =
                        OutFile::create(&cfg.out_dir, &format!("{stem}.norm.txt"), "ccdf", cfg)?;
                    for (x, g) in points.xs.iter().zip(&points.gauss) {
                        norm.line(format!("{x} {g}"))?;
                    }
                    written.push(norm.finish()?);

                    match select_xmin(&sample, estimator, &fit_config(cfg)) {
                        Ok(fit) => {
                            let mut fitted = OutFile::create(
                                &cfg.out_dir,
                                &format!("{stem}.fit.txt"),
                                "ccdf",
                                cfg,
                            )?;
                            // power-law line anchored at the tail fraction
                            let anchor = fit.n as f64 / sample.len() as f64;
                            for &x in points.xs.iter().filter(|&&x| x >= fit.xmin) {
                                let y = anchor * (x / fit.xmin).powf(-fit.alpha);
                                fitted.line(format!("{x} {y}"))?;
                            }
                            written.push(fitted.finish()?);
                        }
                        Err(e) => {
                            eprintln!(
                                "ccdf {} at {dt}s {side}: no fitted line: {e}",
                                ds.exchange_id
                            );
                        }
                    }
                }
            }
        }
        if written.is_empty() {
            return Err(CliError::Data("no CCDF output produced".into()));
        }
        println!("ccdf: wrote {} files", written.len());
        Ok(written)
    })
}

/// Parameters for `tailfit fixture`.
#[derive(Debug, Clone)]
pub struct FixtureParams {
    pub spec: FixtureSpec,
    pub out_file: PathBuf,
}

pub fn run_fixture(cfg: &RunConfig, params: &FixtureParams) -> Result<Vec<PathBuf>, CliError> {
    params
        .spec
        .validate()
        .map_err(CliError::Usage)?;
    if let Some(dir) = params.out_file.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)
                .map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))?;
        }
    }
    let file = std::fs::File::create(&params.out_file)
        .map_err(|e| CliError::Data(format!("{}: {e}", params.out_file.display())))?;
    let mut w = std::io::BufWriter::new(file);
    let spec = &params.spec;
    writeln!(w, "# tailfit fixture").map_err(CliError::from_io)?;
    writeln!(
        w,
        "# config_hash={:016x} master_seed={} alpha={} xmin={} n={} body={} delta_t={}",
        cfg.hash(),
        spec.seed,
        spec.alpha,
        spec.xmin_return,
        spec.n_bars,
        spec.body_fraction,
        spec.delta_t
    )
    .map_err(CliError::from_io)?;
    let summary = write_fixture(&mut w, spec).map_err(CliError::from_io)?;
    w.flush().map_err(CliError::from_io)?;
    println!(
        "fixture: {} trades ({} tail draws) -> {}",
        summary.trades,
        summary.tail_draws,
        params.out_file.display()
    );
    Ok(vec![params.out_file.clone()])
}
