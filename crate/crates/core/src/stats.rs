//! Scalar statistics: special functions, OLS with t-tests, Pearson correlation.
//!
//! Everything here is hand-rolled on top of f64 so the crate stays
//! dependency-free and usable without std. Targets: normal CDF to 1e-12
//! absolute, Student-t CDF to 1e-10 absolute.

use crate::fmath;
use core::fmt;

/// Errors from the scalar-statistics routines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StatsError {
    /// Fewer observations than the statistic requires.
    InsufficientData { needed: usize, got: usize },
    /// All regressor values equal; the design matrix is singular.
    DegenerateDesign,
    /// A coordinate has zero variance; correlation is undefined.
    ZeroVariance,
}

impl fmt::Display for StatsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatsError::InsufficientData { needed, got } => {
                write!(f, "insufficient data: need at least {needed} points, got {got}")
            }
            StatsError::DegenerateDesign => write!(f, "degenerate design: regressor is constant"),
            StatsError::ZeroVariance => write!(f, "zero variance in a coordinate"),
        }
    }
}

impl core::error::Error for StatsError {}

// ---------------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------------

/// ln Γ(x) for x > 0, Lanczos approximation (g = 7, 9 terms).
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_7;
    let z = x - 1.0;
    let mut series = COEF[0];
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        series += c / (z + i as f64);
    }
    let t = z + 7.5;
    HALF_LN_TWO_PI + (z + 0.5) * fmath::ln(t) - t + fmath::ln(series)
}

/// Continued fraction for the regularized incomplete beta (Lentz's method).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const FPMIN: f64 = 1e-300;
    const EPS: f64 = 3e-15;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if fmath::abs(d) < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=300 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if fmath::abs(d) < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if fmath::abs(c) < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if fmath::abs(d) < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if fmath::abs(c) < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if fmath::abs(del - 1.0) < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function I_x(a, b), a > 0, b > 0, x in [0, 1].
pub fn inc_beta(x: f64, a: f64, b: f64) -> f64 {
    debug_assert!(a > 0.0 && b > 0.0);
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b)
        + a * fmath::ln(x)
        + b * fmath::ln(1.0 - x);
    let front = fmath::exp(ln_front);
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

/// CDF of Student's t distribution with `dof` degrees of freedom.
pub fn student_t_cdf(t: f64, dof: f64) -> f64 {
    debug_assert!(dof >= 1.0);
    if t == 0.0 {
        return 0.5;
    }
    let x = dof / (dof + t * t);
    let half_tail = 0.5 * inc_beta(x, 0.5 * dof, 0.5);
    if t > 0.0 {
        1.0 - half_tail
    } else {
        half_tail
    }
}

// Cephes `ndtr` constants (Moshier). polevl evaluates descending-power
// polynomials; p1evl has an implicit leading 1.
fn polevl(x: f64, coef: &[f64]) -> f64 {
    let mut r = 0.0;
    for &c in coef {
        r = r * x + c;
    }
    r
}

fn p1evl(x: f64, coef: &[f64]) -> f64 {
    let mut r = x + coef[0];
    for &c in &coef[1..] {
        r = r * x + c;
    }
    r
}

#[allow(clippy::excessive_precision)]
fn erf(x: f64) -> f64 {
    const T: [f64; 5] = [
        9.60497373987051638749e0,
        9.00260197203842689217e1,
        2.23200534594684319226e3,
        7.00332514112805075473e3,
        5.55923013010394962768e4,
    ];
    const U: [f64; 5] = [
        3.35617141647503099647e1,
        5.21357949780152679795e2,
        4.59432382970980127987e3,
        2.26290000613890934246e4,
        4.92673942608635921086e4,
    ];
    if fmath::abs(x) > 1.0 {
        return 1.0 - erfc(x);
    }
    let z = x * x;
    x * polevl(z, &T) / p1evl(z, &U)
}

#[allow(clippy::excessive_precision)]
fn erfc(a: f64) -> f64 {
    const P: [f64; 9] = [
        2.46196981473530512524e-10,
        5.64189564831068821977e-1,
        7.46321056442269912687e0,
        4.86371970985681366614e1,
        1.96520832956077098242e2,
        5.26445194995477358631e2,
        9.34528527171957607540e2,
        1.02755188689515710272e3,
        5.57535335369399327526e2,
    ];
    const Q: [f64; 8] = [
        1.32281951154744992508e1,
        8.67072140885989742329e1,
        3.54937778887819891062e2,
        9.75708501743205489753e2,
        1.82390916687909736289e3,
        2.24633760818710981792e3,
        1.65666309194161350182e3,
        5.57535340817727675546e2,
    ];
    const R: [f64; 6] = [
        5.64189583547755073984e-1,
        1.27536670759978104416e0,
        5.01905042251180477414e0,
        6.16021097993053585195e0,
        7.40974269950448939160e0,
        2.97886665372100240670e0,
    ];
    const S: [f64; 6] = [
        2.26052863220117276590e0,
        9.39603524938001434673e0,
        1.20489539808096656605e1,
        1.70814450747565897222e1,
        9.60896809063285878198e0,
        3.36907645100081516050e0,
    ];
    const MAXLOG: f64 = 7.09782712893383996843e2;

    let x = fmath::abs(a);
    if x < 1.0 {
        return 1.0 - erf(a);
    }
    let z = -a * a;
    if z < -MAXLOG {
        return if a < 0.0 { 2.0 } else { 0.0 };
    }
    let ez = fmath::exp(z);
    let y = if x < 8.0 {
        ez * polevl(x, &P) / p1evl(x, &Q)
    } else {
        ez * polevl(x, &R) / p1evl(x, &S)
    };
    if a < 0.0 {
        2.0 - y
    } else {
        y
    }
}

const FRAC_1_SQRT_2: f64 = core::f64::consts::FRAC_1_SQRT_2;

/// Standard normal CDF Φ(x).
pub fn normal_cdf(x: f64) -> f64 {
    let z = x * FRAC_1_SQRT_2;
    if fmath::abs(z) < FRAC_1_SQRT_2 {
        0.5 + 0.5 * erf(z)
    } else {
        let y = 0.5 * erfc(fmath::abs(z));
        if x > 0.0 {
            1.0 - y
        } else {
            y
        }
    }
}

/// Standard normal complementary CDF 1 − Φ(x), accurate deep in the tail.
pub fn normal_ccdf(x: f64) -> f64 {
    normal_cdf(-x)
}

// ---------------------------------------------------------------------------
// OLS and correlation
// ---------------------------------------------------------------------------

/// Simple linear regression y = β0 + β1·x with two-tailed coefficient t-tests.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionResult {
    pub beta0: f64,
    pub beta1: f64,
    pub se0: f64,
    pub se1: f64,
    pub t0: f64,
    pub t1: f64,
    pub p0: f64,
    pub p1: f64,
    pub n: usize,
    /// Residual variance was exactly zero; p-values are reported as exact 0.
    pub zero_residual: bool,
}

/// Pearson correlation with the t-test for H0: r = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationResult {
    pub r: f64,
    pub n: usize,
    pub t_stat: f64,
    pub p_value: f64,
}

fn two_tailed_p(t: f64, dof: f64) -> f64 {
    let p = 2.0 * (1.0 - student_t_cdf(fmath::abs(t), dof));
    p.clamp(0.0, 1.0)
}

/// Ordinary least squares of `y` on `x` with n−2 residual degrees of freedom.
pub fn ols_fit(x: &[f64], y: &[f64]) -> Result<RegressionResult, StatsError> {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    if n < 3 {
        return Err(StatsError::InsufficientData { needed: 3, got: n });
    }
    let nf = n as f64;
    let x_bar = x.iter().sum::<f64>() / nf;
    let y_bar = y.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..n {
        let dx = x[i] - x_bar;
        sxx += dx * dx;
        sxy += dx * (y[i] - y_bar);
    }
    if sxx <= 0.0 {
        return Err(StatsError::DegenerateDesign);
    }
    let beta1 = sxy / sxx;
    let beta0 = y_bar - beta1 * x_bar;
    let mut rss = 0.0;
    for i in 0..n {
        let e = y[i] - beta0 - beta1 * x[i];
        rss += e * e;
    }
    let dof = nf - 2.0;
    if rss <= 0.0 {
        return Ok(RegressionResult {
            beta0,
            beta1,
            se0: 0.0,
            se1: 0.0,
            t0: f64::INFINITY,
            t1: f64::INFINITY,
            p0: 0.0,
            p1: 0.0,
            n,
            zero_residual: true,
        });
    }
    let sigma2 = rss / dof;
    let se1 = fmath::sqrt(sigma2 / sxx);
    let se0 = fmath::sqrt(sigma2 * (1.0 / nf + x_bar * x_bar / sxx));
    let t0 = beta0 / se0;
    let t1 = beta1 / se1;
    Ok(RegressionResult {
        beta0,
        beta1,
        se0,
        se1,
        t0,
        t1,
        p0: two_tailed_p(t0, dof),
        p1: two_tailed_p(t1, dof),
        n,
        zero_residual: false,
    })
}

/// Pearson correlation of paired samples, with t = r·√((n−2)/(1−r²)).
pub fn pearson_test(x: &[f64], y: &[f64]) -> Result<CorrelationResult, StatsError> {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    if n < 3 {
        return Err(StatsError::InsufficientData { needed: 3, got: n });
    }
    let nf = n as f64;
    let x_bar = x.iter().sum::<f64>() / nf;
    let y_bar = y.iter().sum::<f64>() / nf;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let dx = x[i] - x_bar;
        let dy = y[i] - y_bar;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let r = (sxy / fmath::sqrt(sxx * syy)).clamp(-1.0, 1.0);
    let dof = nf - 2.0;
    let denom = 1.0 - r * r;
    let (t_stat, p_value) = if denom <= 0.0 {
        (if r > 0.0 { f64::INFINITY } else { f64::NEG_INFINITY }, 0.0)
    } else {
        let t = r * fmath::sqrt(dof / denom);
        (t, two_tailed_p(t, dof))
    };
    Ok(CorrelationResult {
        r,
        n,
        t_stat,
        p_value,
    })
}
