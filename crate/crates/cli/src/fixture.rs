//! Synthetic trade fixtures: CSV files whose bar returns mix a bounded
//! uniform body with two-sided Pareto tails of known exponent, for
//! end-to-end pipeline verification at desk scale.

use std::io::{self, Write};
use tailfit_core::gof::pareto_transform;
use tailfit_core::rng::Xoshiro256PlusPlus;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixtureSpec {
    /// Tail exponent of the bar-return magnitudes.
    pub alpha: f64,
    /// Return-space tail cutoff; body draws stay below half of it.
    pub xmin_return: f64,
    /// Bars (and trades) to emit, one trade per bar close.
    pub n_bars: usize,
    pub seed: u64,
    /// Fraction of returns drawn from the uniform body.
    pub body_fraction: f64,
    pub delta_t: u64,
    pub start_price: f64,
    /// Timestamp of the bar before the first emitted trade.
    pub start_ts: i64,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        Self {
            alpha: 2.5,
            xmin_return: 0.01,
            n_bars: 100_000,
            seed: 0,
            body_fraction: 0.9,
            delta_t: 60,
            start_price: 1000.0,
            start_ts: 1_300_000_000 - (1_300_000_000 % 60),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixtureSummary {
    pub trades: u64,
    pub tail_draws: u64,
    pub first_ts: i64,
    pub last_ts: i64,
}

impl FixtureSpec {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.alpha > 0.0) {
            return Err(format!("alpha must be positive, got {}", self.alpha));
        }
        if !(self.xmin_return > 0.0) {
            return Err(format!("xmin must be positive, got {}", self.xmin_return));
        }
        if self.n_bars < 2 {
            return Err("need at least 2 bars".into());
        }
        if !(0.0..1.0).contains(&self.body_fraction) {
            return Err(format!(
                "body fraction must be in [0, 1), got {}",
                self.body_fraction
            ));
        }
        if self.delta_t == 0 {
            return Err("delta_t must be positive".into());
        }
        if !(self.start_price > 0.0) {
            return Err(format!("start price must be positive, got {}", self.start_price));
        }
        Ok(())
    }

    /// One log-return draw: uniform body inside (−xmin/2, xmin/2) with
    /// probability `body_fraction`, otherwise a signed Pareto magnitude.
    fn draw_return(&self, rng: &mut Xoshiro256PlusPlus) -> (f64, bool) {
        if rng.unit_half_open() < self.body_fraction {
            ((rng.unit_half_open() - 0.5) * self.xmin_return, false)
        } else {
            let mag = pareto_transform(rng.unit_open_closed(), self.alpha, self.xmin_return);
            let sign = if rng.next_u64() & 1 == 0 { 1.0 } else { -1.0 };
            (sign * mag, true)
        }
    }
}

/// Writes the fixture CSV. Identical specs produce byte-identical output.
pub fn write_fixture<W: Write>(out: &mut W, spec: &FixtureSpec) -> io::Result<FixtureSummary> {
    debug_assert!(spec.validate().is_ok());
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(spec.seed);
    let mut price = spec.start_price;
    let mut tail_draws = 0u64;
    let first_ts = spec.start_ts + spec.delta_t as i64;
    let mut last_ts = first_ts;
    for k in 0..spec.n_bars {
        let (r, is_tail) = spec.draw_return(&mut rng);
        tail_draws += is_tail as u64;
        price *= r.exp();
        let quantity = 0.05 + 1.95 * rng.unit_half_open();
        last_ts = spec.start_ts + (k as i64 + 1) * spec.delta_t as i64;
        writeln!(out, "{last_ts},{price},{quantity}")?;
    }
    Ok(FixtureSummary {
        trades: spec.n_bars as u64,
        tail_draws,
        first_ts,
        last_ts,
    })
}

/// In-memory fixture body, for tests and seeded studies.
pub fn fixture_string(spec: &FixtureSpec) -> (String, FixtureSummary) {
    let mut buf = Vec::with_capacity(spec.n_bars * 32);
    let summary = write_fixture(&mut buf, spec).expect("vec write");
    (String::from_utf8(buf).expect("ascii"), summary)
}
