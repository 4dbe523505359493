//! Property tests for the library invariants.

use proptest::collection::vec;
use proptest::prelude::*;
use tailfit_core::gof::{gof_test, GofConfig, SeedPolicy};
use tailfit_core::market::ingest_str;
use tailfit_core::returns::{standardize, ReturnKind, ReturnSeries};
use tailfit_core::stats::{normal_cdf, ols_fit, pearson_test, student_t_cdf};
use tailfit_core::tail::{
    empirical_ccdf, hill_estimate, ks_statistic, select_xmin, Estimator, FitConfig, Side,
    TailFit, TailSample,
};

fn raw_series(values: Vec<f64>) -> ReturnSeries {
    ReturnSeries {
        exchange_id: "prop".into(),
        delta_t: 60,
        times: (0..values.len()).map(|i| 60 * (i as i64 + 1)).collect(),
        values,
        kind: ReturnKind::Raw,
        mu: None,
        sigma: None,
        window_id: None,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hill_is_scale_equivariant(
        values in vec(1.0f64..1e4, 60..200),
        scale in prop_oneof![1e-6f64..1e-3, 0.1f64..10.0, 1e3f64..1e6],
    ) {
        let cfg = FitConfig { n_min: 50, ..FitConfig::default() };
        let base = TailSample::new(Side::Positive, values.clone()).unwrap();
        let Ok(f1) = hill_estimate(&base, 1.0, &cfg) else { return Ok(()) };
        let scaled: Vec<f64> = values.iter().map(|v| v * scale).collect();
        let s2 = TailSample::new(Side::Positive, scaled).unwrap();
        let f2 = hill_estimate(&s2, scale, &cfg).unwrap();
        prop_assert!((f1.alpha - f2.alpha).abs() <= 1e-12 * f1.alpha.abs());
    }

    #[test]
    fn ks_distance_is_a_probability_gap(
        mut values in vec(1.0f64..1e5, 1..80),
        alpha in 0.2f64..6.0,
    ) {
        values.sort_unstable_by(f64::total_cmp);
        let d = ks_statistic(&values, alpha, 1.0);
        prop_assert!((0.0..=1.0).contains(&d));
    }

    #[test]
    fn nested_cutoffs_nest_tail_counts(
        values in vec(1.0f64..1e4, 60..300),
        cut in 1.0f64..50.0,
        widen in 1.0f64..4.0,
    ) {
        let cfg = FitConfig { n_min: 1, ..FitConfig::default() };
        let s = TailSample::new(Side::Positive, values).unwrap();
        let lo = hill_estimate(&s, cut, &cfg);
        let hi = hill_estimate(&s, cut * widen, &cfg);
        if let (Ok(lo), Ok(hi)) = (lo, hi) {
            prop_assert!(lo.n >= hi.n);
        }
    }

    #[test]
    fn select_ignores_input_order(
        values in vec(0.01f64..100.0, 60..150),
        seed in any::<u64>(),
    ) {
        let mut shuffled = values.clone();
        // cheap deterministic shuffle
        let mut state = seed | 1;
        for i in (1..shuffled.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (state % (i as u64 + 1)) as usize);
        }
        let cfg = FitConfig { n_min: 50, ..FitConfig::default() };
        let a = select_xmin(&TailSample::new(Side::Positive, values).unwrap(), Estimator::Hill, &cfg);
        let b = select_xmin(&TailSample::new(Side::Positive, shuffled).unwrap(), Estimator::Hill, &cfg);
        match (a, b) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
            (a, b) => prop_assert_eq!(a.is_err(), b.is_err()),
        }
    }

    #[test]
    fn ccdf_is_monotone_in_unit_range(values in vec(0.001f64..1e6, 1..200)) {
        let s = TailSample::new(Side::Positive, values).unwrap();
        let pts = empirical_ccdf(&s);
        for w in pts.ccdf.windows(2) {
            prop_assert!(w[1] <= w[0]);
        }
        prop_assert!(pts.ccdf.iter().all(|&q| (0.0..=1.0).contains(&q)));
        prop_assert_eq!(*pts.ccdf.last().unwrap(), 0.0);
    }

    #[test]
    fn standardization_is_idempotent_and_affine_invariant(
        values in vec(-0.2f64..0.2, 8..200),
        a in 0.1f64..20.0,
        b in -5.0f64..5.0,
    ) {
        let Ok(once) = standardize(&raw_series(values.clone())) else { return Ok(()) };
        let twice = standardize(&once).unwrap();
        for (x, y) in once.values.iter().zip(&twice.values) {
            prop_assert!((x - y).abs() < 1e-12);
        }
        let mapped: Vec<f64> = values.iter().map(|v| a * v + b).collect();
        let other = standardize(&raw_series(mapped)).unwrap();
        for (x, y) in once.values.iter().zip(&other.values) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn log_return_sum_telescopes(prices in vec(1.0f64..1e4, 2..300)) {
        let body: String = prices
            .iter()
            .enumerate()
            .map(|(i, p)| format!("{},{p},1\n", 60 * (i + 1)))
            .collect();
        let (ds, _) = ingest_str("prop", &body, 86_400.0).unwrap();
        let bars = tailfit_core::returns::resample_bars(&ds, 60).unwrap();
        let r = tailfit_core::returns::log_returns(&bars, "prop").unwrap();
        let sum: f64 = r.values.iter().sum();
        let expect = prices.last().unwrap().ln() - prices[0].ln();
        prop_assert!((sum - expect).abs() < 1e-10);
    }

    #[test]
    fn ingest_same_bytes_same_dataset(
        rows in vec((0.0f64..1e6, 0.5f64..1e4, 0.1f64..100.0), 1..100),
    ) {
        let body: String = rows
            .iter()
            .map(|(t, p, q)| format!("{t},{p},{q}\n"))
            .collect();
        let (a, ra) = ingest_str("prop", &body, 3600.0).unwrap();
        let (b, rb) = ingest_str("prop", &body, 3600.0).unwrap();
        // timestamps sorted
        prop_assert!(a.trades.windows(2).all(|w| w[0].timestamp <= w[1].timestamp));
        prop_assert_eq!(a.trades, b.trades);
        prop_assert_eq!(a.coverage, b.coverage);
        prop_assert_eq!(ra.accepted, rb.accepted);
    }

    #[test]
    fn pearson_r_invariant_under_positive_affine(
        pairs in vec((-10.0f64..10.0, -10.0f64..10.0), 5..60),
        ax in 0.1f64..10.0,
        bx in -3.0f64..3.0,
    ) {
        let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let Ok(base) = pearson_test(&xs, &ys) else { return Ok(()) };
        let xs2: Vec<f64> = xs.iter().map(|x| ax * x + bx).collect();
        let mapped = pearson_test(&xs2, &ys).unwrap();
        prop_assert!((base.r - mapped.r).abs() < 1e-9);
        prop_assert!((base.p_value - mapped.p_value).abs() < 1e-9);
    }

    #[test]
    fn ols_equivariant_under_response_scaling(
        pairs in vec((-10.0f64..10.0, -10.0f64..10.0), 5..60),
        a in 0.1f64..10.0,
        b in -3.0f64..3.0,
    ) {
        let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let Ok(base) = ols_fit(&xs, &ys) else { return Ok(()) };
        if base.zero_residual { return Ok(()); }
        let ys2: Vec<f64> = ys.iter().map(|y| a * y + b).collect();
        let mapped = ols_fit(&xs, &ys2).unwrap();
        prop_assert!((mapped.beta0 - (a * base.beta0 + b)).abs() < 1e-7 * (1.0 + base.beta0.abs()));
        prop_assert!((mapped.beta1 - a * base.beta1).abs() < 1e-7 * (1.0 + base.beta1.abs()));
        prop_assert!((mapped.t1 - base.t1).abs() < 1e-6 * (1.0 + base.t1.abs()));
        prop_assert!((mapped.p1 - base.p1).abs() < 1e-9);
    }

    #[test]
    fn t_cdf_converges_to_normal(x in -4.0f64..4.0) {
        let diff = (student_t_cdf(x, 1e5) - normal_cdf(x)).abs();
        prop_assert!(diff < 1e-3);
    }

    #[test]
    fn gof_p_value_is_a_counting_fraction(
        alpha in 1.5f64..3.5,
        seed in any::<u64>(),
    ) {
        let n = 200usize;
        let fit = TailFit {
            estimator: Estimator::Hill,
            alpha,
            xmin: 1.0,
            n,
            stderr: Some(alpha / (n as f64).sqrt()),
            ks: 0.05,
        };
        let cfg = GofConfig { replicates: 100, ..GofConfig::default() };
        let res = gof_test(&fit, &cfg, SeedPolicy::new(seed)).unwrap();
        prop_assert!((0.0..=1.0).contains(&res.p_value));
        let scaled = res.p_value * res.replicates as f64;
        prop_assert!((scaled - scaled.round()).abs() < 1e-9);
    }
}
