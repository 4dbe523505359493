//! Heavy-tail analysis of high-frequency return series.
//!
//! The pipeline: ingest trade-level CSV data ([`market`]), resample it into
//! fixed-interval bars and standardized log-returns ([`returns`]), fit
//! power-law tails with the Hill and log-log regression estimators under
//! KS-minimizing cutoff selection ([`tail`]), validate fits with a seeded
//! resampling goodness-of-fit test ([`gof`]), and run windowed-regression,
//! liquidity-correlation, and multi-interval sweep studies ([`studies`]).
//!
//! The crate is `no_std`-compatible (with `alloc`); enable the `libm`
//! feature for builds without `std`. All randomized procedures are
//! deterministic per master seed.

#![cfg_attr(not(feature = "std"), no_std)]

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("tailfit-core requires either the `std` or the `libm` feature");

extern crate alloc;

mod fmath;

pub mod gof;
pub mod market;
pub mod returns;
pub mod rng;
pub mod stats;
pub mod studies;
pub mod tail;
pub mod time;
