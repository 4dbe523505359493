//! UTC calendar arithmetic: day bucketing, month boundaries, half-year windows.
//!
//! All instants are Unix seconds; calendar days are days since 1970-01-01.
//! The proleptic-Gregorian conversions below are exact over the full i64 day
//! range (Howard Hinnant's civil-days algorithms).

use crate::fmath;
use alloc::string::String;
use alloc::vec::Vec;

pub const SECS_PER_DAY: i64 = 86_400;

/// Days since 1970-01-01 for a civil date (year, month 1-12, day 1-31).
pub fn days_from_civil(year: i64, month: u32, day: u32) -> i64 {
    let y = if month <= 2 { year - 1 } else { year };
    let era = if y >= 0 { y } else { y - 399 } / 400;
    let yoe = (y - era * 400) as i64; // [0, 399]
    let mp = if month > 2 { month - 3 } else { month + 9 } as i64;
    let doy = (153 * mp + 2) / 5 + day as i64 - 1; // [0, 365]
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy; // [0, 146096]
    era * 146_097 + doe - 719_468
}

/// Inverse of [`days_from_civil`].
pub fn civil_from_days(days: i64) -> (i64, u32, u32) {
    let z = days + 719_468;
    let era = if z >= 0 { z } else { z - 146_096 } / 146_097;
    let doe = z - era * 146_097; // [0, 146096]
    let yoe = (doe - doe / 1460 + doe / 36524 - doe / 146_096) / 365; // [0, 399]
    let y = yoe + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100); // [0, 365]
    let mp = (5 * doy + 2) / 153; // [0, 11]
    let day = (doy - (153 * mp + 2) / 5 + 1) as u32; // [1, 31]
    let month = if mp < 10 { mp + 3 } else { mp - 9 } as u32; // [1, 12]
    (if month <= 2 { y + 1 } else { y }, month, day)
}

/// UTC calendar day containing a Unix-seconds instant.
pub fn day_of_instant(ts: f64) -> i64 {
    fmath::floor(ts / SECS_PER_DAY as f64) as i64
}

/// Unix seconds at 00:00:00 UTC on the first of a month.
pub fn month_start(year: i64, month: u32) -> i64 {
    days_from_civil(year, month, 1) * SECS_PER_DAY
}

fn add_months(year: i64, month: u32, n: u32) -> (i64, u32) {
    let total = year * 12 + (month as i64 - 1) + n as i64;
    (total.div_euclid(12), (total.rem_euclid(12) + 1) as u32)
}

/// One of the consecutive, non-overlapping 6-month analysis periods.
/// `start` is inclusive, `end` exclusive; `index` is 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HalfYearWindow {
    pub index: u32,
    pub start: i64,
    pub end: i64,
}

impl HalfYearWindow {
    pub fn contains(&self, ts: i64) -> bool {
        ts >= self.start && ts < self.end
    }
}

/// Consecutive 6-month windows from the start month (inclusive) until the
/// end month (exclusive). `(2010, 8)..(2018, 2)` yields 15 windows.
pub fn half_year_windows(start: (i64, u32), end: (i64, u32)) -> Vec<HalfYearWindow> {
    let end_ts = month_start(end.0, end.1);
    let mut out = Vec::new();
    let (mut y, mut m) = start;
    let mut index = 1u32;
    loop {
        let w_start = month_start(y, m);
        if w_start >= end_ts {
            break;
        }
        let (ny, nm) = add_months(y, m, 6);
        out.push(HalfYearWindow {
            index,
            start: w_start,
            end: month_start(ny, nm),
        });
        y = ny;
        m = nm;
        index += 1;
    }
    out
}

/// Windows covering an instant span: the first window starts at the month
/// containing `start_ts`; windows are emitted while they begin before `end_ts`.
pub fn windows_spanning(start_ts: f64, end_ts: f64) -> Vec<HalfYearWindow> {
    let d = day_of_instant(start_ts);
    let (y, m, _) = civil_from_days(d);
    let mut out = Vec::new();
    let (mut wy, mut wm) = (y, m);
    let mut index = 1u32;
    while (month_start(wy, wm) as f64) < end_ts {
        let (ny, nm) = add_months(wy, wm, 6);
        out.push(HalfYearWindow {
            index,
            start: month_start(wy, wm),
            end: month_start(ny, nm),
        });
        wy = ny;
        wm = nm;
        index += 1;
    }
    out
}

/// `YYYY-MM-DD` for a day number.
pub fn format_day(days: i64) -> String {
    let (y, m, d) = civil_from_days(days);
    alloc::format!("{y:04}-{m:02}-{d:02}")
}

/// ISO-8601 `YYYY-MM-DDTHH:MM:SSZ`, truncating fractional seconds.
pub fn format_instant(ts: f64) -> String {
    let secs = fmath::floor(ts) as i64;
    let days = secs.div_euclid(SECS_PER_DAY);
    let sod = secs.rem_euclid(SECS_PER_DAY);
    let (y, m, d) = civil_from_days(days);
    let (hh, mm, ss) = (sod / 3600, (sod % 3600) / 60, sod % 60);
    alloc::format!("{y:04}-{m:02}-{d:02}T{hh:02}:{mm:02}:{ss:02}Z")
}

/// Parses `YYYY-MM` into a (year, month) pair.
pub fn parse_year_month(s: &str) -> Option<(i64, u32)> {
    let (y, m) = s.split_once('-')?;
    let year: i64 = y.parse().ok()?;
    let month: u32 = m.parse().ok()?;
    if (1..=12).contains(&month) {
        Some((year, month))
    } else {
        None
    }
}
