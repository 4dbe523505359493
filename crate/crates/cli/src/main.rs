use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use tailfit_cli::commands::{
    run_ccdf, run_fit, run_fixture, run_gof, run_ingest, run_sweep, run_windows, FixtureParams,
};
use tailfit_cli::config::{
    parse_delta_t, parse_delta_t_list, parse_estimators, parse_sides, RunConfig,
};
use tailfit_cli::fixture::FixtureSpec;
use tailfit_cli::CliError;

/// Power-law tail estimation for trade-level market data.
#[derive(Parser)]
#[command(name = "tailfit", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse trade CSVs, validate rows, and report coverage.
    Ingest(CommonArgs),
    /// Fit tail exponents per (exchange, interval, side, estimator).
    Fit(CommonArgs),
    /// Fit tails and run the resampling goodness-of-fit test on each.
    Gof(CommonArgs),
    /// Fit and test across an interval grid; emits table and point files.
    Sweep(CommonArgs),
    /// Half-year window studies: temporal regression and liquidity correlation.
    Windows(CommonArgs),
    /// Emit empirical CCDF plot data with fitted and Gaussian references.
    Ccdf(CommonArgs),
    /// Generate a synthetic trade CSV with a known tail exponent.
    Fixture(FixtureArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Flat key=value config file; flags override its settings.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input source, repeatable: <exchange>=<path> (.gz accepted).
    #[arg(long = "input", value_name = "EXCHANGE=PATH")]
    inputs: Vec<String>,
    /// Bar intervals, e.g. "60,300" or "1m,5m,1h,1d".
    #[arg(long = "delta-t", value_name = "LIST")]
    delta_t: Option<String>,
    /// Estimators: hill,regression.
    #[arg(long = "estimator", value_name = "LIST")]
    estimators: Option<String>,
    /// Tails: positive,negative or "both".
    #[arg(long, value_name = "LIST")]
    sides: Option<String>,
    /// Synthetic datasets per goodness-of-fit test.
    #[arg(long)]
    replicates: Option<u32>,
    /// Confidence level for rejection decisions.
    #[arg(long)]
    confidence: Option<f64>,
    /// Master seed; every randomized result derives from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Minimum tail points per fit.
    #[arg(long = "n-min")]
    n_min: Option<usize>,
    /// Cutoff-candidate budget for the KS scan.
    #[arg(long = "max-candidates")]
    max_candidates: Option<usize>,
    /// Coverage gap threshold in seconds.
    #[arg(long = "gap-threshold")]
    gap_threshold: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Drop exact-zero returns before standardization.
    #[arg(long = "drop-zero-returns")]
    drop_zero_returns: bool,
    /// Re-select the cutoff on every goodness-of-fit replicate.
    #[arg(long = "refit-xmin")]
    refit_xmin: bool,
    /// Bonferroni-adjust window tests; 0 uses the number of tests run.
    #[arg(long, value_name = "M")]
    bonferroni: Option<usize>,
    /// Worker threads (0 = library default). Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Pool standardized returns across exchanges before fitting (sweep).
    #[arg(long)]
    aggregate: bool,
    /// First half-year window, YYYY-MM.
    #[arg(long = "window-start", value_name = "YYYY-MM")]
    window_start: Option<String>,
    /// End of the last half-year window (exclusive), YYYY-MM.
    #[arg(long = "window-end", value_name = "YYYY-MM")]
    window_end: Option<String>,
}

#[derive(Args)]
struct FixtureArgs {
    /// Tail exponent of the generated bar returns.
    #[arg(long, default_value_t = 2.5)]
    alpha: f64,
    /// Return-space tail cutoff.
    #[arg(long, default_value_t = 0.01)]
    xmin: f64,
    /// Number of bars (one trade per bar).
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fraction of returns drawn from the uniform body.
    #[arg(long, default_value_t = 0.9)]
    body: f64,
    /// Bar interval (seconds or 1m/1h/1d form).
    #[arg(long = "delta-t", default_value = "60")]
    delta_t: String,
    #[arg(long = "start-price", default_value_t = 1000.0)]
    start_price: f64,
    /// Output CSV path (default <out>/fixture.csv).
    #[arg(long = "out-file")]
    out_file: Option<PathBuf>,
    /// Output directory used when --out-file is not given.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn build_config(args: &CommonArgs) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &args.config {
        cfg.apply_file(path)?;
    }
    for spec in &args.inputs {
        let Some((exchange, path)) = spec.split_once('=') else {
            return Err(CliError::Usage(format!(
                "--input expects <exchange>=<path>, got {spec:?}"
            )));
        };
        cfg.add_input(exchange.trim(), PathBuf::from(path.trim()));
    }
    if let Some(v) = &args.delta_t {
        cfg.delta_ts = parse_delta_t_list(v)?;
    }
    if let Some(v) = &args.estimators {
        cfg.estimators = parse_estimators(v)?;
    }
    if let Some(v) = &args.sides {
        cfg.sides = parse_sides(v)?;
    }
    if let Some(v) = args.replicates {
        cfg.replicates = v;
    }
    if let Some(v) = args.confidence {
        cfg.set("confidence", &v.to_string())?;
    }
    if let Some(v) = args.seed {
        cfg.master_seed = v;
    }
    if let Some(v) = args.n_min {
        cfg.n_min = v;
    }
    if let Some(v) = args.max_candidates {
        cfg.set("max_candidates", &v.to_string())?;
    }
    if let Some(v) = args.gap_threshold {
        cfg.set("gap_threshold", &v.to_string())?;
    }
    if let Some(v) = &args.out {
        cfg.out_dir = v.clone();
    }
    if args.drop_zero_returns {
        cfg.drop_zero_returns = true;
    }
    if args.refit_xmin {
        cfg.refit_xmin = true;
    }
    if let Some(m) = args.bonferroni {
        cfg.bonferroni = Some(m);
    }
    if let Some(t) = args.threads {
        cfg.threads = t;
    }
    if args.aggregate {
        cfg.aggregate = true;
    }
    if let Some(v) = &args.window_start {
        cfg.set("window_start", v)?;
    }
    if let Some(v) = &args.window_end {
        cfg.set("window_end", v)?;
    }
    if cfg.delta_ts.is_empty() {
        return Err(CliError::Usage("delta_t list is empty".into()));
    }
    if cfg.estimators.is_empty() || cfg.sides.is_empty() {
        return Err(CliError::Usage(
            "estimator/side lists must be non-empty".into(),
        ));
    }
    Ok(cfg)
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Ingest(a) => run_ingest(&build_config(&a)?).map(|_| ()),
        Command::Fit(a) => run_fit(&build_config(&a)?).map(|_| ()),
        Command::Gof(a) => run_gof(&build_config(&a)?).map(|_| ()),
        Command::Sweep(a) => run_sweep(&build_config(&a)?).map(|_| ()),
        Command::Windows(a) => run_windows(&build_config(&a)?).map(|_| ()),
        Command::Ccdf(a) => run_ccdf(&build_config(&a)?).map(|_| ()),
        Command::Fixture(a) => {
            let mut cfg = RunConfig::default();
            cfg.master_seed = a.seed;
            if let Some(out) = &a.out {
                cfg.out_dir = out.clone();
            }
            let spec = FixtureSpec {
                alpha: a.alpha,
                xmin_return: a.xmin,
                n_bars: a.n,
                seed: a.seed,
                body_fraction: a.body,
                delta_t: parse_delta_t(&a.delta_t)?,
                start_price: a.start_price,
                ..FixtureSpec::default()
            };
            let out_file = a
                .out_file
                .unwrap_or_else(|| cfg.out_dir.join("fixture.csv"));
            run_fixture(&cfg, &FixtureParams { spec, out_file }).map(|_| ())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are success; real parse errors are usage
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
