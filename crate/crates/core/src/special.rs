//! Scalar special functions used by the distribution, fitting and testing code.
//!
//! Everything here is pure. The public functions check
//! their domain and return [`DomainError`]; the crate-internal `*_raw`
//! variants skip the checks for use in inner loops where the arguments are
//! already known to be valid.

use thiserror::Error;

/// Argument outside the domain of a special function.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{function}: argument {name} = {value} is outside the domain ({requirement})")]
pub struct DomainError {
    pub function: &'static str,
    pub name: &'static str,
    pub value: f64,
    pub requirement: &'static str,
}

fn domain(function: &'static str, name: &'static str, value: f64, requirement: &'static str) -> DomainError {
    DomainError {
        function,
        name,
        value,
        requirement,
    }
}

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

// 0!, 1!, ..., 20!; all exactly representable.
const FACTORIALS: [f64; 21] = [
    1.0,
    1.0,
    2.0,
    6.0,
    24.0,
    120.0,
    720.0,
    5040.0,
    40320.0,
    362880.0,
    3628800.0,
    39916800.0,
    479001600.0,
    6227020800.0,
    87178291200.0,
    1307674368000.0,
    20922789888000.0,
    355687428096000.0,
    6402373705728000.0,
    121645100408832000.0,
    2432902008176640000.0,
];

// Stirling series coefficients B_{2k} / (2k (2k - 1)), k = 1..8.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
];

const STIRLING_CUTOFF: f64 = 12.0;

fn stirling_ln_gamma(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut pow = inv;
    for c in STIRLING {
        series += c * pow;
        pow *= inv2;
    }
    (x - 0.5) * x.ln() - x + HALF_LN_2PI + series
}

/// ln Γ(x) for x > 0 without argument checks.
pub(crate) fn ln_gamma_raw(x: f64) -> f64 {
    if x.fract() == 0.0 && x <= 21.0 {
        return FACTORIALS[x as usize - 1].ln();
    }
    if x >= STIRLING_CUTOFF {
        return stirling_ln_gamma(x);
    }
    // Shift up into the asymptotic region: Γ(x) = Γ(x + n) / (x (x+1) ... (x+n-1)).
    let mut shifted = x;
    let mut product = 1.0;
    while shifted < STIRLING_CUTOFF {
        product *= shifted;
        shifted += 1.0;
    }
    stirling_ln_gamma(shifted) - product.ln()
}

/// Natural logarithm of the gamma function.
pub fn ln_gamma(x: f64) -> Result<f64, DomainError> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain("ln_gamma", "x", x, "x > 0"));
    }
    Ok(ln_gamma_raw(x))
}

pub(crate) fn ln_binomial_raw(n: u64, k: u64) -> f64 {
    if k == 0 || k == n {
        return 0.0;
    }
    ln_gamma_raw(n as f64 + 1.0) - ln_gamma_raw(k as f64 + 1.0) - ln_gamma_raw((n - k) as f64 + 1.0)
}

/// ln C(n, k).
pub fn ln_binomial(n: u64, k: u64) -> Result<f64, DomainError> {
    if k > n {
        return Err(domain("ln_binomial", "k", k as f64, "0 <= k <= n"));
    }
    Ok(ln_binomial_raw(n, k))
}

/// ln B(a, b) = ln Γ(a) + ln Γ(b) − ln Γ(a + b).
pub fn ln_beta(a: f64, b: f64) -> Result<f64, DomainError> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(domain("ln_beta", "a", a, "a > 0"));
    }
    if !(b > 0.0) || !b.is_finite() {
        return Err(domain("ln_beta", "b", b, "b > 0"));
    }
    Ok(ln_gamma_raw(a) + ln_gamma_raw(b) - ln_gamma_raw(a + b))
}

/// Prefix sums of ln(a + i): entry `j` is ln of the rising factorial (a)_j.
///
/// Differences of log-beta values whose arguments differ by integers reduce
/// to these sums, which stay accurate when `a` is very large or very small.
pub(crate) fn ln_rising_prefix(a: f64, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len + 1);
    let mut acc = 0.0;
    out.push(acc);
    for i in 0..len {
        acc += (a + i as f64).ln();
        out.push(acc);
    }
    out
}

/// ln B(a + j, b + m) − ln B(a, b) for nonnegative integer shifts.
pub fn ln_beta_shift_ratio(a: f64, b: f64, j: u64, m: u64) -> Result<f64, DomainError> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(domain("ln_beta_shift_ratio", "a", a, "a > 0"));
    }
    if !(b > 0.0) || !b.is_finite() {
        return Err(domain("ln_beta_shift_ratio", "b", b, "b > 0"));
    }
    let ra = ln_rising_prefix(a, j as usize);
    let rb = ln_rising_prefix(b, m as usize);
    let rab = ln_rising_prefix(a + b, (j + m) as usize);
    Ok(ra[j as usize] + rb[m as usize] - rab[(j + m) as usize])
}

const GAMMA_EPS: f64 = 1e-16;
const GAMMA_MAX_ITER: usize = 10_000;

// Series for P(s, x), valid for x < s + 1.
fn lower_gamma_series(s: f64, x: f64) -> f64 {
    let mut term = 1.0 / s;
    let mut sum = term;
    let mut denom = s;
    for _ in 0..GAMMA_MAX_ITER {
        denom += 1.0;
        term *= x / denom;
        sum += term;
        if term.abs() < sum.abs() * GAMMA_EPS {
            break;
        }
    }
    (sum.ln() - x + s * x.ln() - ln_gamma_raw(s)).exp()
}

// Continued fraction for Q(s, x) (modified Lentz), valid for x >= s + 1.
fn upper_gamma_cf(s: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - s;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..GAMMA_MAX_ITER {
        let an = -(i as f64) * (i as f64 - s);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < GAMMA_EPS {
            break;
        }
    }
    (h.ln() - x + s * x.ln() - ln_gamma_raw(s)).exp()
}

/// Returns (P(s, x), Q(s, x)), each computed on the side where it is accurate.
pub(crate) fn regularized_gamma_pair_raw(s: f64, x: f64) -> (f64, f64) {
    if x == 0.0 {
        return (0.0, 1.0);
    }
    if x.is_infinite() {
        return (1.0, 0.0);
    }
    if x < s + 1.0 {
        let p = lower_gamma_series(s, x).min(1.0);
        (p, 1.0 - p)
    } else {
        let q = upper_gamma_cf(s, x).min(1.0);
        (1.0 - q, q)
    }
}

fn check_gamma_args(function: &'static str, s: f64, x: f64) -> Result<(), DomainError> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(domain(function, "s", s, "s > 0"));
    }
    if !(x >= 0.0) {
        return Err(domain(function, "x", x, "x >= 0"));
    }
    Ok(())
}

/// Regularized lower incomplete gamma function P(s, x).
pub fn regularized_gamma_lower(s: f64, x: f64) -> Result<f64, DomainError> {
    check_gamma_args("regularized_gamma_lower", s, x)?;
    Ok(regularized_gamma_pair_raw(s, x).0)
}

/// Regularized upper incomplete gamma function Q(s, x) = 1 − P(s, x).
pub fn regularized_gamma_upper(s: f64, x: f64) -> Result<f64, DomainError> {
    check_gamma_args("regularized_gamma_upper", s, x)?;
    Ok(regularized_gamma_pair_raw(s, x).1)
}

/// Survival function of the χ² distribution with `df` degrees of freedom.
pub fn chi_squared_sf(stat: f64, df: f64) -> Result<f64, DomainError> {
    if !(stat >= 0.0) {
        return Err(domain("chi_squared_sf", "stat", stat, "stat >= 0"));
    }
    if !(df > 0.0) || !df.is_finite() {
        return Err(domain("chi_squared_sf", "df", df, "df > 0"));
    }
    Ok(regularized_gamma_pair_raw(df / 2.0, stat / 2.0).1)
}

/// Standard normal CDF Φ(x).
///
/// Uses Φ(x) = Q(1/2, x²/2) / 2 for x < 0, so both tails are evaluated from
/// the small side and Φ(x) + Φ(−x) = 1 up to rounding.
pub fn std_normal_cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let tail = 0.5 * regularized_gamma_pair_raw(0.5, 0.5 * x * x).1;
    if x < 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

/// P(lo < Z ≤ hi) for a standard normal Z, without cancellation in the tails.
pub(crate) fn std_normal_interval(lo: f64, hi: f64) -> f64 {
    if lo >= hi {
        return 0.0;
    }
    let p = if lo >= 0.0 {
        std_normal_cdf(-lo) - std_normal_cdf(-hi)
    } else if hi <= 0.0 {
        std_normal_cdf(hi) - std_normal_cdf(lo)
    } else {
        1.0 - std_normal_cdf(lo) - std_normal_cdf(-hi)
    };
    p.max(0.0)
}

/// ln(e^a + e^b) without overflow; −∞ inputs are absorbed.
pub(crate) fn ln_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}
