//! Scalar special functions: the standard normal distribution and the error
//! function family.
//!
//! The normal cdf is evaluated independently of `erf`: a Taylor series
//! (Marsaglia) on `|z| < 3` and the Laplace continued fraction for the Mills
//! ratio beyond, which keeps relative accuracy deep into the lower tail.
//! `erf`/`erfc` come from `libm`. Keeping the two paths separate lets the
//! identity `erf(x) = 2Φ(x√2) − 1` act as a cross-check.
//!
//! Accuracy targets: `|Φ(z) − exact| ≤ 1e-12`, `|Φ(Φ⁻¹(p)) − p| ≤ 1e-9`.

use crate::error::{Error, Result};

pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_741_780_329_736_406;
const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_677_939_946_059_934;
const TAYLOR_LIMIT: f64 = 3.0;
const SATURATION: f64 = 38.0;

#[inline]
pub fn std_normal_pdf(z: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * z * z).exp()
}

#[inline]
pub fn ln_std_normal_pdf(z: f64) -> f64 {
    -0.5 * z * z - LN_SQRT_2PI
}

/// Mills ratio `R(x) = Φ(−x)/φ(x)` for `x ≥ 3` by backward evaluation of
/// `1/(x + 1/(x + 2/(x + 3/(x + …))))`.
fn mills_ratio(x: f64) -> f64 {
    debug_assert!(x >= TAYLOR_LIMIT);
    let terms = 10 + (150.0 / x) as usize;
    let mut t = x;
    for k in (1..=terms).rev() {
        t = x + k as f64 / t;
    }
    1.0 / t
}

/// `x + x³/3 + x⁵/15 + …`, so that `Φ(x) = ½ + φ(x)·series`.
fn taylor_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut k = 1.0;
    loop {
        term *= x2 / (2.0 * k + 1.0);
        let next = sum + term;
        if next == sum {
            return sum;
        }
        sum = next;
        k += 1.0;
    }
}

/// Standard normal cdf Φ(z). Saturates to exactly 0 or 1 for `|z| > 38`.
pub fn std_normal_cdf(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    if z > SATURATION {
        return 1.0;
    }
    if z < -SATURATION {
        return 0.0;
    }
    if z.abs() < TAYLOR_LIMIT {
        0.5 + std_normal_pdf(z) * taylor_series(z)
    } else if z < 0.0 {
        std_normal_pdf(z) * mills_ratio(-z)
    } else {
        1.0 - std_normal_pdf(z) * mills_ratio(z)
    }
}

/// Upper tail `1 − Φ(z) = Φ(−z)`.
#[inline]
pub fn std_normal_sf(z: f64) -> f64 {
    std_normal_cdf(-z)
}

/// `ln Φ(z)` without saturation in either tail.
pub fn ln_std_normal_cdf(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    if z <= -TAYLOR_LIMIT {
        ln_std_normal_pdf(z) + mills_ratio(-z).ln()
    } else if z < TAYLOR_LIMIT {
        std_normal_cdf(z).ln()
    } else {
        // Φ(z) = 1 − φ(z)R(z), tiny complement
        (-std_normal_pdf(z) * mills_ratio(z)).ln_1p()
    }
}

fn acklam(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.38357751867269e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// Lower-half quantile: Acklam's rational start, then Halley steps against
/// [`std_normal_cdf`].
fn lower_quantile(p: f64) -> f64 {
    let mut x = acklam(p);
    for _ in 0..2 {
        let density = std_normal_pdf(x);
        if density == 0.0 || !density.is_finite() {
            break;
        }
        let u = (std_normal_cdf(x) - p) / density;
        x -= u / (1.0 + 0.5 * x * u);
    }
    x
}

/// Standard normal quantile Φ⁻¹(p) for `0 < p < 1`.
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain {
            what: "probability",
            value: p,
        });
    }
    Ok(if p <= 0.5 {
        lower_quantile(p)
    } else {
        -lower_quantile(1.0 - p)
    })
}

#[inline]
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

#[inline]
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// `ln erfc(x)`, switching to the normal log-tail once `erfc` would
/// underflow or lose relative precision.
pub fn ln_erfc(x: f64) -> f64 {
    if x < 5.0 {
        erfc(x).ln()
    } else {
        // erfc(x) = 2Φ(−x√2)
        std::f64::consts::LN_2 + ln_std_normal_cdf(-x * std::f64::consts::SQRT_2)
    }
}

const TWO_OVER_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

/// Inverse complementary error function on `0 < q < 2`.
pub fn erfc_inv(q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 2.0) {
        return Err(Error::Domain {
            what: "erfc argument",
            value: q,
        });
    }
    if q > 1.0 {
        return Ok(-erfc_inv(2.0 - q)?);
    }
    // erfc(x) = 2Φ(−x√2)
    let mut x = -lower_quantile(0.5 * q) * std::f64::consts::FRAC_1_SQRT_2;
    let slope = TWO_OVER_SQRT_PI * (-x * x).exp();
    if slope > 0.0 {
        x += (erfc(x) - q) / slope;
    }
    Ok(x)
}

/// Inverse error function on `−1 < u < 1`.
pub fn erf_inv(u: f64) -> Result<f64> {
    if !(u > -1.0 && u < 1.0) {
        return Err(Error::Domain {
            what: "erf argument",
            value: u,
        });
    }
    if u.abs() > 0.5 {
        let x = erfc_inv(1.0 - u.abs())?;
        return Ok(x.copysign(u));
    }
    let mut x = -lower_quantile(0.5 * (1.0 - u)) * std::f64::consts::FRAC_1_SQRT_2;
    for _ in 0..2 {
        let slope = TWO_OVER_SQRT_PI * (-x * x).exp();
        x -= (erf(x) - u) / slope;
    }
    Ok(x)
}

/// `ln(1 + eˣ)` without overflow.
#[inline]
pub(crate) fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}
