//! Trade-level market data: parsing, validation, coverage, daily activity.

use crate::time::{self, SECS_PER_DAY};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

/// One executed transaction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trade {
    /// Seconds since the Unix epoch, UTC. May be fractional.
    pub timestamp: f64,
    /// Price in USD per unit, strictly positive.
    pub price: f64,
    /// Traded quantity, strictly positive.
    pub quantity: f64,
}

/// A contiguous span of data uninterrupted by a gap longer than the
/// gap threshold. Both endpoints are trade timestamps (closed interval).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageInterval {
    pub start: f64,
    pub end: f64,
}

/// All accepted trades of one venue, sorted by timestamp, with gap-split
/// coverage intervals. Immutable once built.
#[derive(Debug, Clone)]
pub struct ExchangeDataset {
    pub exchange_id: String,
    pub trades: Vec<Trade>,
    pub coverage: Vec<CoverageInterval>,
}

/// Per-source ingest accounting, emitted alongside the dataset.
#[derive(Debug, Clone)]
pub struct IngestReport {
    pub exchange_id: String,
    pub accepted: u64,
    pub rejected: u64,
    pub gap_threshold: f64,
    pub coverage: Vec<CoverageInterval>,
    /// First few rejection messages, for the report (capped).
    pub sample_errors: Vec<String>,
}

/// Daily trade-activity entry for one UTC calendar day inside coverage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DayActivity {
    /// Days since 1970-01-01.
    pub day: i64,
    pub trade_count: u64,
    /// Σ price·quantity over the day.
    pub usd_volume: f64,
    /// Trailing mean of `trade_count` over the ≤30 most recent covered days.
    pub ma30_count: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldName {
    Timestamp,
    Price,
    Quantity,
}

impl fmt::Display for FieldName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldName::Timestamp => write!(f, "timestamp"),
            FieldName::Price => write!(f, "price"),
            FieldName::Quantity => write!(f, "quantity"),
        }
    }
}

/// Why a line was rejected; carries the 1-based line number.
#[derive(Debug, Clone, PartialEq)]
pub enum ParseError {
    FieldCount { line: u64, found: usize },
    Unparseable { line: u64, field: FieldName, value: String },
    NonFinite { line: u64, field: FieldName },
    NonPositive { line: u64, field: FieldName, value: f64 },
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::FieldCount { line, found } => {
                write!(f, "line {line}: expected 3 comma-separated fields, found {found}")
            }
            ParseError::Unparseable { line, field, value } => {
                write!(f, "line {line}: {field} field {value:?} is not a number")
            }
            ParseError::NonFinite { line, field } => {
                write!(f, "line {line}: {field} field is not finite")
            }
            ParseError::NonPositive { line, field, value } => {
                write!(f, "line {line}: {field} must be positive, got {value}")
            }
        }
    }
}

impl core::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
pub enum IngestError {
    /// No accepted trades in the source.
    NoTrades,
    /// The gap threshold must be a positive, finite number of seconds.
    BadGapThreshold(f64),
}

impl fmt::Display for IngestError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IngestError::NoTrades => write!(f, "no trades"),
            IngestError::BadGapThreshold(v) => write!(f, "gap threshold must be > 0, got {v}"),
        }
    }
}

impl core::error::Error for IngestError {}

/// Default coverage gap threshold: one day.
pub const DEFAULT_GAP_THRESHOLD: f64 = 86_400.0;

const MAX_SAMPLE_ERRORS: usize = 5;

fn parse_field(
    raw: &str,
    field: FieldName,
    line: u64,
    require_positive: bool,
) -> Result<f64, ParseError> {
    let trimmed = raw.trim();
    let value: f64 = trimmed.parse().map_err(|_| ParseError::Unparseable {
        line,
        field: field.clone(),
        value: trimmed.to_string(),
    })?;
    if !value.is_finite() {
        return Err(ParseError::NonFinite { line, field });
    }
    if require_positive && value <= 0.0 {
        return Err(ParseError::NonPositive { line, field, value });
    }
    Ok(value)
}

/// Parses one `timestamp,price,quantity` CSV line.
pub fn parse_trade(line: &str, line_no: u64) -> Result<Trade, ParseError> {
    let mut fields = line.split(',');
    let ts = fields.next().unwrap_or("");
    let (price, quantity) = match (fields.next(), fields.next(), fields.next()) {
        (Some(p), Some(q), None) => (p, q),
        (p, q, _) => {
            let found = 1 + p.is_some() as usize + q.is_some() as usize + fields.count();
            return Err(ParseError::FieldCount { line: line_no, found });
        }
    };
    Ok(Trade {
        timestamp: parse_field(ts, FieldName::Timestamp, line_no, false)?,
        price: parse_field(price, FieldName::Price, line_no, true)?,
        quantity: parse_field(quantity, FieldName::Quantity, line_no, true)?,
    })
}

/// Streaming trade ingester: feed lines, then [`Ingestor::finish`].
///
/// Rejected lines (malformed or non-positive fields) are counted and
/// reported, not fatal. A leading header row is detected by a non-numeric
/// first field and skipped.
#[derive(Debug)]
pub struct Ingestor {
    exchange_id: String,
    gap_threshold: f64,
    trades: Vec<Trade>,
    rejected: u64,
    sample_errors: Vec<String>,
    line_no: u64,
    saw_first_line: bool,
}

impl Ingestor {
    pub fn new(exchange_id: &str, gap_threshold: f64) -> Result<Self, IngestError> {
        if !(gap_threshold > 0.0) || !gap_threshold.is_finite() {
            return Err(IngestError::BadGapThreshold(gap_threshold));
        }
        Ok(Self {
            exchange_id: exchange_id.to_string(),
            gap_threshold,
            trades: Vec::new(),
            rejected: 0,
            sample_errors: Vec::new(),
            line_no: 0,
            saw_first_line: false,
        })
    }

    pub fn push_line(&mut self, line: &str) {
        self.line_no += 1;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.is_empty() || line.starts_with('#') {
            return;
        }
        if !self.saw_first_line {
            self.saw_first_line = true;
            let first = line.split(',').next().unwrap_or("");
            if first.trim().parse::<f64>().is_err() {
                return; // header row
            }
        }
        match parse_trade(line, self.line_no) {
            Ok(trade) => self.trades.push(trade),
            Err(err) => {
                self.rejected += 1;
                if self.sample_errors.len() < MAX_SAMPLE_ERRORS {
                    self.sample_errors.push(err.to_string());
                }
            }
        }
    }

    pub fn finish(self) -> Result<(ExchangeDataset, IngestReport), IngestError> {
        let Ingestor {
            exchange_id,
            gap_threshold,
            mut trades,
            rejected,
            sample_errors,
            ..
        } = self;
        if trades.is_empty() {
            return Err(IngestError::NoTrades);
        }
        // Stable: equal-timestamp trades keep input order.
        trades.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
        let coverage = split_coverage(&trades, gap_threshold);
        let report = IngestReport {
            exchange_id: exchange_id.clone(),
            accepted: trades.len() as u64,
            rejected,
            gap_threshold,
            coverage: coverage.clone(),
            sample_errors,
        };
        Ok((
            ExchangeDataset {
                exchange_id,
                trades,
                coverage,
            },
            report,
        ))
    }
}

/// One-shot ingest of an in-memory CSV body.
pub fn ingest_str(
    exchange_id: &str,
    body: &str,
    gap_threshold: f64,
) -> Result<(ExchangeDataset, IngestReport), IngestError> {
    let mut ing = Ingestor::new(exchange_id, gap_threshold)?;
    for line in body.lines() {
        ing.push_line(line);
    }
    ing.finish()
}

fn split_coverage(sorted: &[Trade], gap_threshold: f64) -> Vec<CoverageInterval> {
    let mut out = Vec::new();
    let mut start = sorted[0].timestamp;
    let mut prev = start;
    for t in &sorted[1..] {
        if t.timestamp - prev > gap_threshold {
            out.push(CoverageInterval { start, end: prev });
            start = t.timestamp;
        }
        prev = t.timestamp;
    }
    out.push(CoverageInterval { start, end: prev });
    out
}

impl ExchangeDataset {
    /// Trades belonging to each coverage interval, in order.
    pub fn coverage_slices(&self) -> impl Iterator<Item = (CoverageInterval, &[Trade])> {
        let mut lo = 0usize;
        self.coverage.iter().map(move |&iv| {
            let hi = lo
                + self.trades[lo..]
                    .iter()
                    .position(|t| t.timestamp > iv.end)
                    .unwrap_or(self.trades.len() - lo);
            let slice = &self.trades[lo..hi];
            lo = hi;
            (iv, slice)
        })
    }
}

/// Daily trade counts and USD volume over covered days, with the trailing
/// 30-day moving average of the count. Days inside coverage with no trades
/// appear with zero counts; days outside coverage are omitted.
pub fn daily_activity(dataset: &ExchangeDataset) -> Vec<DayActivity> {
    if dataset.trades.is_empty() {
        return Vec::new();
    }
    // Covered day set (coverage intervals are ordered and disjoint, but may
    // share a UTC day).
    let mut days: Vec<i64> = Vec::new();
    for iv in &dataset.coverage {
        let d0 = time::day_of_instant(iv.start);
        let d1 = time::day_of_instant(iv.end);
        let from = match days.last() {
            Some(&last) if last >= d0 => last + 1,
            _ => d0,
        };
        days.extend(from..=d1);
    }

    // Per-day totals; trades are sorted, so totals come out in day order.
    let mut totals: Vec<(i64, u64, f64)> = Vec::new();
    for t in &dataset.trades {
        let d = time::day_of_instant(t.timestamp);
        match totals.last_mut() {
            Some(last) if last.0 == d => {
                last.1 += 1;
                last.2 += t.price * t.quantity;
            }
            _ => totals.push((d, 1, t.price * t.quantity)),
        }
    }

    let mut out = Vec::with_capacity(days.len());
    let mut ti = 0usize;
    let mut window: Vec<u64> = Vec::with_capacity(30);
    let mut window_sum: u64 = 0;
    let mut window_pos = 0usize;
    for day in days {
        let (count, volume) = if ti < totals.len() && totals[ti].0 == day {
            let (_, c, v) = totals[ti];
            ti += 1;
            (c, v)
        } else {
            (0, 0.0)
        };
        if window.len() < 30 {
            window.push(count);
        } else {
            window_sum -= window[window_pos];
            window[window_pos] = count;
            window_pos = (window_pos + 1) % 30;
        }
        window_sum += count;
        out.push(DayActivity {
            day,
            trade_count: count,
            usd_volume: volume,
            ma30_count: window_sum as f64 / window.len() as f64,
        });
    }
    debug_assert_eq!(ti, totals.len());
    out
}

/// Mean daily USD volume over covered days whose day-start lies in
/// `[start, end)`. Returns `None` when no covered day falls in the span.
pub fn mean_daily_volume(activity: &[DayActivity], start: i64, end: i64) -> Option<f64> {
    let mut sum = 0.0;
    let mut n = 0u64;
    for a in activity {
        let day_start = a.day * SECS_PER_DAY;
        if day_start >= start && day_start < end {
            sum += a.usd_volume;
            n += 1;
        }
    }
    (n > 0).then(|| sum / n as f64)
}
