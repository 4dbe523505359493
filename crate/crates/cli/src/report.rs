//! Record and table formatting. Floats are rendered with the shortest
//! round-trip representation so identical results produce identical bytes.

use tailfit_core::gof::GofResult;
use tailfit_core::market::IngestReport;
use tailfit_core::tail::{Estimator, Side, TailFit};
use tailfit_core::time::format_instant;

/// Quotes a CSV field when it contains a delimiter, quote, or newline.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

pub fn ingest_record(r: &IngestReport) -> String {
    format!(
        "ingest exchange={} accepted={} rejected={} gap_threshold={} intervals={}",
        r.exchange_id,
        r.accepted,
        r.rejected,
        r.gap_threshold,
        r.coverage.len()
    )
}

pub fn coverage_record(exchange: &str, start: f64, end: f64) -> String {
    format!(
        "coverage exchange={exchange} start={} end={}",
        format_instant(start),
        format_instant(end)
    )
}

pub fn fit_record(
    exchange: &str,
    delta_t: u64,
    side: Side,
    estimator: Estimator,
    n_returns: usize,
    fit: &Result<TailFit, String>,
) -> String {
    match fit {
        Ok(f) => format!(
            "fit exchange={exchange} delta_t={delta_t} side={side} estimator={estimator} \
             status=ok n_returns={n_returns} alpha={} xmin={} n={} stderr={} ks={}",
            f.alpha,
            f.xmin,
            f.n,
            opt(f.stderr),
            f.ks
        ),
        Err(reason) => format!(
            "fit exchange={exchange} delta_t={delta_t} side={side} estimator={estimator} \
             status=error n_returns={n_returns} reason={reason:?}"
        ),
    }
}

pub fn gof_record(exchange: &str, delta_t: u64, side: Side, g: &GofResult) -> String {
    format!(
        "gof exchange={exchange} delta_t={delta_t} side={side} estimator={} alpha={} xmin={} \
         n={} d_emp={} replicates={} p_value={} plausible={} redraws={} \
         d_q05={} d_q50={} d_q95={} master_seed={}",
        g.estimator,
        g.alpha_hat,
        g.xmin,
        g.n,
        g.d_emp,
        g.replicates,
        g.p_value,
        g.plausible(),
        g.redraws,
        g.d_quantile(0.05),
        g.d_quantile(0.50),
        g.d_quantile(0.95),
        g.master_seed
    )
}

pub const SWEEP_CSV_HEADER: &str =
    "exchange,delta_t,side,estimator,n_returns,alpha,stderr,xmin,n_tail,ks,p_value,plausible,error";

pub fn sweep_csv_row(cell: &tailfit_core::studies::SweepCell) -> String {
    let (alpha, stderr, xmin, n_tail, ks, error) = match &cell.fit {
        Ok(f) => (
            f.alpha.to_string(),
            opt(f.stderr),
            f.xmin.to_string(),
            f.n.to_string(),
            f.ks.to_string(),
            String::new(),
        ),
        Err(e) => (
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            e.clone(),
        ),
    };
    let (p_value, plausible) = match &cell.gof {
        Some(Ok(g)) => (g.p_value.to_string(), g.plausible().to_string()),
        _ => (String::new(), String::new()),
    };
    format!(
        "{},{},{},{},{},{alpha},{stderr},{xmin},{n_tail},{ks},{p_value},{plausible},{}",
        cell.exchange_id,
        cell.delta_t,
        cell.side,
        cell.estimator,
        cell.n_returns,
        csv_field(&error)
    )
}

/// Fig-4-shaped point: exponent with its error bar and plausibility flag
/// per (Δt, side, estimator).
pub fn sweep_point_record(cell: &tailfit_core::studies::SweepCell) -> Option<String> {
    let fit = cell.fit.as_ref().ok()?;
    Some(format!(
        "point exchange={} delta_t={} side={} estimator={} alpha={} stderr={} plausible={}",
        cell.exchange_id,
        cell.delta_t,
        cell.side,
        cell.estimator,
        fit.alpha,
        opt(fit.stderr),
        cell.plausible().map_or_else(String::new, |p| p.to_string()),
    ))
}

pub fn regression_record(side: Side, r: &tailfit_core::stats::RegressionResult) -> String {
    format!(
        "regression side={side} windows={} beta0={} p0={} beta1={} p1={} se0={} se1={} t0={} t1={} zero_residual={}",
        r.n, r.beta0, r.p0, r.beta1, r.p1, r.se0, r.se1, r.t0, r.t1, r.zero_residual
    )
}

pub fn correlation_record(side: Side, c: &tailfit_core::stats::CorrelationResult) -> String {
    format!(
        "liquidity side={side} n={} r={} t_stat={} p_value={}",
        c.n, c.r, c.t_stat, c.p_value
    )
}
