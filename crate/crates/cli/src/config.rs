//! Run configuration: defaults, flat key=value config files, flag overrides.
//!
//! Precedence: built-in defaults, then the config file, then command-line
//! flags. The canonical rendering of the merged config is hashed into every
//! output file so a run can be reproduced exactly.

use crate::CliError;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use tailfit_core::rng::fnv1a64;
use tailfit_core::tail::{Estimator, Side};
use tailfit_core::time::parse_year_month;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// (exchange id, csv path) pairs, sorted by exchange id.
    pub inputs: Vec<(String, PathBuf)>,
    pub delta_ts: Vec<u64>,
    pub estimators: Vec<Estimator>,
    pub sides: Vec<Side>,
    pub replicates: u32,
    pub confidence: f64,
    pub master_seed: u64,
    pub n_min: usize,
    pub max_candidates: usize,
    pub gap_threshold: f64,
    pub out_dir: PathBuf,
    pub drop_zero_returns: bool,
    pub refit_xmin: bool,
    /// Bonferroni test count; 0 means "use the number of tests performed".
    pub bonferroni: Option<usize>,
    pub threads: usize,
    pub aggregate: bool,
    pub window_start: Option<(i64, u32)>,
    pub window_end: Option<(i64, u32)>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            inputs: Vec::new(),
            delta_ts: vec![300],
            estimators: vec![Estimator::Hill, Estimator::Regression],
            sides: vec![Side::Positive, Side::Negative],
            replicates: 1000,
            confidence: 0.95,
            master_seed: 0,
            n_min: 50,
            max_candidates: 2000,
            gap_threshold: 86_400.0,
            out_dir: PathBuf::from("out"),
            drop_zero_returns: false,
            refit_xmin: false,
            bonferroni: None,
            threads: 0,
            aggregate: false,
            window_start: None,
            window_end: None,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Parses an interval spec: raw seconds or a count with a m/h/d suffix.
pub fn parse_delta_t(s: &str) -> Result<u64, CliError> {
    let s = s.trim();
    let (digits, mult) = match s.as_bytes().last() {
        Some(b'm') => (&s[..s.len() - 1], 60),
        Some(b'h') => (&s[..s.len() - 1], 3600),
        Some(b'd') => (&s[..s.len() - 1], 86_400),
        Some(b's') => (&s[..s.len() - 1], 1),
        _ => (s, 1),
    };
    let v: u64 = digits
        .parse()
        .map_err(|_| usage(format!("bad interval {s:?}; use seconds or e.g. 1m, 4h, 1d")))?;
    if v == 0 {
        return Err(usage("interval must be positive"));
    }
    Ok(v * mult)
}

pub fn parse_delta_t_list(s: &str) -> Result<Vec<u64>, CliError> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(parse_delta_t)
        .collect()
}

pub fn parse_estimators(s: &str) -> Result<Vec<Estimator>, CliError> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| match p.trim() {
            "hill" => Ok(Estimator::Hill),
            "regression" | "reg" => Ok(Estimator::Regression),
            "both" | "all" => Err(usage("list estimators explicitly: hill,regression")),
            other => Err(usage(format!("unknown estimator {other:?}"))),
        })
        .collect()
}

pub fn parse_sides(s: &str) -> Result<Vec<Side>, CliError> {
    match s.trim() {
        "both" => return Ok(vec![Side::Positive, Side::Negative]),
        _ => {}
    }
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| match p.trim() {
            "positive" | "pos" => Ok(Side::Positive),
            "negative" | "neg" => Ok(Side::Negative),
            other => Err(usage(format!("unknown side {other:?}"))),
        })
        .collect()
}

fn parse_bool(key: &str, v: &str) -> Result<bool, CliError> {
    match v {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(usage(format!("{key}: expected a boolean, got {v:?}"))),
    }
}

impl RunConfig {
    /// Adds one input, replacing an earlier path for the same exchange.
    pub fn add_input(&mut self, exchange: &str, path: PathBuf) {
        if let Some(slot) = self.inputs.iter_mut().find(|(e, _)| e == exchange) {
            slot.1 = path;
        } else {
            self.inputs.push((exchange.to_string(), path));
            self.inputs.sort();
        }
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let value = value.trim();
        match key {
            k if k.starts_with("input.") => {
                let exchange = &k["input.".len()..];
                if exchange.is_empty() {
                    return Err(usage("input.<exchange> needs an exchange name"));
                }
                self.add_input(exchange, PathBuf::from(value));
            }
            "delta_t" => self.delta_ts = parse_delta_t_list(value)?,
            "estimators" => self.estimators = parse_estimators(value)?,
            "sides" => self.sides = parse_sides(value)?,
            "replicates" => {
                self.replicates = value
                    .parse()
                    .map_err(|_| usage(format!("replicates: bad integer {value:?}")))?
            }
            "confidence" => {
                let c: f64 = value
                    .parse()
                    .map_err(|_| usage(format!("confidence: bad number {value:?}")))?;
                if !(c > 0.0 && c < 1.0) {
                    return Err(usage("confidence must be in (0, 1)"));
                }
                self.confidence = c;
            }
            "seed" => {
                self.master_seed = value
                    .parse()
                    .map_err(|_| usage(format!("seed: bad integer {value:?}")))?
            }
            "n_min" => {
                self.n_min = value
                    .parse()
                    .map_err(|_| usage(format!("n_min: bad integer {value:?}")))?
            }
            "max_candidates" => {
                let m: usize = value
                    .parse()
                    .map_err(|_| usage(format!("max_candidates: bad integer {value:?}")))?;
                if m < 2 {
                    return Err(usage("max_candidates must be at least 2"));
                }
                self.max_candidates = m;
            }
            "gap_threshold" => {
                let g: f64 = value
                    .parse()
                    .map_err(|_| usage(format!("gap_threshold: bad number {value:?}")))?;
                if !(g > 0.0) || !g.is_finite() {
                    return Err(usage("gap_threshold must be positive"));
                }
                self.gap_threshold = g;
            }
            "out" => self.out_dir = PathBuf::from(value),
            "drop_zero_returns" => self.drop_zero_returns = parse_bool(key, value)?,
            "refit_xmin" => self.refit_xmin = parse_bool(key, value)?,
            "bonferroni" => {
                self.bonferroni = Some(
                    value
                        .parse()
                        .map_err(|_| usage(format!("bonferroni: bad integer {value:?}")))?,
                )
            }
            "threads" => {
                self.threads = value
                    .parse()
                    .map_err(|_| usage(format!("threads: bad integer {value:?}")))?
            }
            "aggregate" => self.aggregate = parse_bool(key, value)?,
            "window_start" => {
                self.window_start =
                    Some(parse_year_month(value).ok_or_else(|| {
                        usage(format!("window_start: expected YYYY-MM, got {value:?}"))
                    })?)
            }
            "window_end" => {
                self.window_end =
                    Some(parse_year_month(value).ok_or_else(|| {
                        usage(format!("window_end: expected YYYY-MM, got {value:?}"))
                    })?)
            }
            other => return Err(usage(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Loads a flat `key = value` config file. `#` starts a comment.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(usage(format!(
                    "{}:{}: expected key = value",
                    path.display(),
                    no + 1
                )));
            };
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    /// Existence check for every referenced input path.
    pub fn check_inputs(&self) -> Result<(), CliError> {
        if self.inputs.is_empty() {
            return Err(usage("no inputs; pass --input <exchange>=<path>"));
        }
        for (exchange, path) in &self.inputs {
            if !path.is_file() {
                return Err(usage(format!(
                    "input for {exchange} does not exist: {}",
                    path.display()
                )));
            }
        }
        Ok(())
    }

    /// Canonical one-line-per-field rendering; input to the config hash.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        for (e, p) in &self.inputs {
            let _ = writeln!(s, "input.{e} = {}", p.display());
        }
        let dts: Vec<String> = self.delta_ts.iter().map(|d| d.to_string()).collect();
        let _ = writeln!(s, "delta_t = {}", dts.join(","));
        let ests: Vec<&str> = self.estimators.iter().map(|e| e.as_str()).collect();
        let _ = writeln!(s, "estimators = {}", ests.join(","));
        let sides: Vec<&str> = self.sides.iter().map(|e| e.as_str()).collect();
        let _ = writeln!(s, "sides = {}", sides.join(","));
        let _ = writeln!(s, "replicates = {}", self.replicates);
        let _ = writeln!(s, "confidence = {}", self.confidence);
        let _ = writeln!(s, "seed = {}", self.master_seed);
        let _ = writeln!(s, "n_min = {}", self.n_min);
        let _ = writeln!(s, "max_candidates = {}", self.max_candidates);
        let _ = writeln!(s, "gap_threshold = {}", self.gap_threshold);
        let _ = writeln!(s, "drop_zero_returns = {}", self.drop_zero_returns);
        let _ = writeln!(s, "refit_xmin = {}", self.refit_xmin);
        if let Some(m) = self.bonferroni {
            let _ = writeln!(s, "bonferroni = {m}");
        }
        let _ = writeln!(s, "aggregate = {}", self.aggregate);
        if let Some((y, m)) = self.window_start {
            let _ = writeln!(s, "window_start = {y:04}-{m:02}");
        }
        if let Some((y, m)) = self.window_end {
            let _ = writeln!(s, "window_end = {y:04}-{m:02}");
        }
        s
    }

    /// Hash of the canonical config; embedded in every output file.
    /// Thread count is excluded: results never depend on parallelism.
    pub fn hash(&self) -> u64 {
        fnv1a64(self.canonical().as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_t_suffixes() {
        assert_eq!(parse_delta_t("60").unwrap(), 60);
        assert_eq!(parse_delta_t("5m").unwrap(), 300);
        assert_eq!(parse_delta_t("4h").unwrap(), 14_400);
        assert_eq!(parse_delta_t("1d").unwrap(), 86_400);
        assert!(parse_delta_t("0").is_err());
        assert!(parse_delta_t("abc").is_err());
        assert_eq!(parse_delta_t_list("1m,5m,1h").unwrap(), vec![60, 300, 3600]);
    }

    #[test]
    fn set_and_hash_round_trip() {
        let mut a = RunConfig::default();
        a.set("seed", "42").unwrap();
        a.set("delta_t", "60,300").unwrap();
        a.set("input.kraken", "k.csv").unwrap();
        a.set("input.bitstamp", "b.csv").unwrap();
        let mut b = RunConfig::default();
        // same settings, different order; inputs sort by exchange
        b.set("input.bitstamp", "b.csv").unwrap();
        b.set("input.kraken", "k.csv").unwrap();
        b.set("delta_t", "1m,5m").unwrap();
        b.set("seed", "42").unwrap();
        assert_eq!(a.hash(), b.hash());
        let mut c = a.clone();
        c.set("seed", "43").unwrap();
        assert_ne!(a.hash(), c.hash());
        // threads never affect the hash
        let mut d = a.clone();
        d.set("threads", "16").unwrap();
        assert_eq!(a.hash(), d.hash());
    }

    #[test]
    fn validation_rejects_bad_values() {
        let mut cfg = RunConfig::default();
        assert!(cfg.set("confidence", "1.5").is_err());
        assert!(cfg.set("gap_threshold", "-1").is_err());
        assert!(cfg.set("estimators", "cauchy").is_err());
        assert!(cfg.set("nonsense", "1").is_err());
        assert!(cfg.set("window_start", "2010-13").is_err());
        assert!(cfg.set("sides", "positive").is_ok());
        assert_eq!(cfg.sides, vec![Side::Positive]);
    }

    #[test]
    fn config_file_parsing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(
            &path,
            "# example\nseed = 7\ndelta_t = 1m, 1h\ninput.gox = gox.csv.gz  # trailing\n",
        )
        .unwrap();
        let mut cfg = RunConfig::default();
        cfg.apply_file(&path).unwrap();
        assert_eq!(cfg.master_seed, 7);
        assert_eq!(cfg.delta_ts, vec![60, 3600]);
        assert_eq!(cfg.inputs[0].0, "gox");
    }
}
