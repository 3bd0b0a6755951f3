//! Base families: the Lognormal head and the Burr, Stoppa and GlogM tails.
//!
//! Every density is evaluated in log space. The Burr family is written with
//! β as a *rate*: it enters as `(yβ)^α`, so increasing β moves mass toward
//! zero. Stoppa and GlogM use β as an ordinary scale.
//!
//! | family | cdf |
//! |--------|-----|
//! | Burr   | `1 − (1 + (yβ)^α)^(−δ)` |
//! | Stoppa | `(1 − (y/β)^(−δ))^α`, `y ≥ β` |
//! | GlogM  | `1 − erf((β/y)^(1/(2α)) / √2)` |

use crate::error::{Error, Result};
use crate::special::{
    erf, erf_inv, erfc, erfc_inv, ln_std_normal_pdf, softplus, std_normal_cdf, std_normal_quantile,
    LN_SQRT_2PI,
};

/// Common interface of the continuous families used here.
pub trait ContinuousDistribution {
    fn ln_pdf(&self, y: f64) -> Result<f64>;

    fn pdf(&self, y: f64) -> Result<f64> {
        Ok(self.ln_pdf(y)?.exp())
    }

    fn cdf(&self, y: f64) -> Result<f64>;

    /// Survival function `1 − F(y)`, evaluated without cancellation.
    fn sf(&self, y: f64) -> Result<f64>;

    fn quantile(&self, p: f64) -> Result<f64>;

    /// Inverse of the survival function: the `y` with `sf(y) = q`.
    fn sf_quantile(&self, q: f64) -> Result<f64>;

    fn mode(&self) -> Result<f64>;
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and positive",
        })
    }
}

fn check_y(y: f64) -> Result<()> {
    if y.is_finite() && y > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "y",
            value: y,
        })
    }
}

fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "probability",
            value: p,
        })
    }
}

// ---------------------------------------------------------------------------
// Lognormal

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogNormal {
    mu: f64,
    sigma: f64,
}

impl LogNormal {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::InvalidParameter {
                name: "mu",
                value: mu,
                reason: "must be finite",
            });
        }
        check_positive("sigma", sigma)?;
        Ok(Self { mu, sigma })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    fn z(&self, y: f64) -> f64 {
        (y.ln() - self.mu) / self.sigma
    }
}

impl ContinuousDistribution for LogNormal {
    fn ln_pdf(&self, y: f64) -> Result<f64> {
        check_y(y)?;
        Ok(ln_std_normal_pdf(self.z(y)) - self.sigma.ln() - y.ln())
    }

    fn cdf(&self, y: f64) -> Result<f64> {
        check_y(y)?;
        Ok(std_normal_cdf(self.z(y)))
    }

    fn sf(&self, y: f64) -> Result<f64> {
        check_y(y)?;
        Ok(std_normal_cdf(-self.z(y)))
    }

    fn quantile(&self, p: f64) -> Result<f64> {
        Ok((self.mu + self.sigma * std_normal_quantile(p)?).exp())
    }

    fn sf_quantile(&self, q: f64) -> Result<f64> {
        Ok((self.mu - self.sigma * std_normal_quantile(q)?).exp())
    }

    fn mode(&self) -> Result<f64> {
        Ok((self.mu - self.sigma * self.sigma).exp())
    }
}

// ---------------------------------------------------------------------------
// Burr

/// Burr tail with density `δα y^(α−1) β^α / ((yβ)^α + 1)^(δ+1)`.
///
/// Note that β multiplies `y`: it is a rate, not a divisor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Burr {
    alpha: f64,
    delta: f64,
    beta: f64,
}

#[inline]
pub(crate) fn burr_ln_pdf(ln_y: f64, alpha: f64, delta: f64, ln_beta: f64) -> f64 {
    let t = alpha * (ln_y + ln_beta);
    delta.ln() + alpha.ln() + (alpha - 1.0) * ln_y + alpha * ln_beta - (delta + 1.0) * softplus(t)
}

#[inline]
fn burr_ln_sf(ln_y: f64, alpha: f64, delta: f64, ln_beta: f64) -> f64 {
    -delta * softplus(alpha * (ln_y + ln_beta))
}

/// Mode of the Burr tail at β = 1.
pub(crate) fn burr_unit_mode(alpha: f64, delta: f64) -> f64 {
    ((alpha - 1.0) / (delta * alpha + 1.0)).powf(1.0 / alpha)
}

impl Burr {
    pub fn new(alpha: f64, delta: f64, beta: f64) -> Result<Self> {
        check_positive("alpha", alpha)?;
        check_positive("delta", delta)?;
        check_positive("beta", beta)?;
        Ok(Self { alpha, delta, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
}

impl ContinuousDistribution for Burr {
    fn ln_pdf(&self, y: f64) -> Result<f64> {
        check_y(y)?;
        Ok(burr_ln_pdf(y.ln(), self.alpha, self.delta, self.beta.ln()))
    }

    fn cdf(&self, y: f64) -> Result<f64> {
        check_y(y)?;
        Ok(-burr_ln_sf(y.ln(), self.alpha, self.delta, self.beta.ln()).exp_m1())
    }

    fn sf(&self, y: f64) -> Result<f64> {
        check_y(y)?;
        Ok(burr_ln_sf(y.ln(), self.alpha, self.delta, self.beta.ln()).exp())
    }

    fn quantile(&self, p: f64) -> Result<f64> {
        check_probability(p)?;
        // (1 − p)^(−1/δ) − 1
        let excess = (-(-p).ln_1p() / self.delta).exp_m1();
        Ok(excess.powf(1.0 / self.alpha) / self.beta)
    }

    fn sf_quantile(&self, q: f64) -> Result<f64> {
        check_probability(q)?;
        let excess = (-q.ln() / self.delta).exp_m1();
        Ok(excess.powf(1.0 / self.alpha) / self.beta)
    }

    fn mode(&self) -> Result<f64> {
        if self.alpha <= 1.0 {
            return Err(Error::ModeUndefined {
                family: "Burr",
                alpha: self.alpha,
            });
        }
        Ok(burr_unit_mode(self.alpha, self.delta) / self.beta)
    }
}

// ---------------------------------------------------------------------------
// Stoppa

/// Stoppa tail on `y ≥ β` with cdf `(1 − (y/β)^(−δ))^α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stoppa {
    alpha: f64,
    delta: f64,
    beta: f64,
}

#[inline]
pub(crate) fn stoppa_ln_pdf(ln_y: f64, alpha: f64, delta: f64, ln_beta: f64) -> f64 {
    let w = (-delta * (ln_y - ln_beta)).exp();
    let body = alpha.ln() + delta.ln() + delta * ln_beta - (delta + 1.0) * ln_y;
    if alpha == 1.0 {
        return body;
    }
    body + (alpha - 1.0) * (-w).ln_1p()
}

/// `ln F` for the Stoppa family, `y ≥ β`.
#[inline]
fn stoppa_ln_cdf(ln_y: f64, alpha: f64, delta: f64, ln_beta: f64) -> f64 {
    let w = (-delta * (ln_y - ln_beta)).exp();
    alpha * (-w).ln_1p()
}

pub(crate) fn stoppa_unit_mode(alpha: f64, delta: f64) -> f64 {
    ((1.0 + alpha * delta) / (1.0 + delta)).powf(1.0 / delta)
}

impl Stoppa {
    pub fn new(alpha: f64, delta: f64, beta: f64) -> Result<Self> {
        check_positive("alpha", alpha)?;
        check_positive("delta", delta)?;
        check_positive("beta", beta)?;
        Ok(Self { alpha, delta, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `y` with `ln F(y) = ln_p`: `(y/β)^(−δ) = 1 − p^(1/α)`.
    fn value_at_ln_cdf(&self, ln_p: f64) -> f64 {
        let w = -(ln_p / self.alpha).exp_m1();
        self.beta * (-w.ln() / self.delta).exp()
    }

    fn check_support(&self, y: f64) -> Result<()> {
        check_y(y)?;
        if y < self.beta {
            return Err(Error::Domain {
                what: "y below Stoppa support",
                value: y,
            });
        }
        Ok(())
    }
}

impl ContinuousDistribution for Stoppa {
    fn ln_pdf(&self, y: f64) -> Result<f64> {
        self.check_support(y)?;
        Ok(stoppa_ln_pdf(
            y.ln(),
            self.alpha,
            self.delta,
            self.beta.ln(),
        ))
    }

    fn cdf(&self, y: f64) -> Result<f64> {
        self.check_support(y)?;
        Ok(stoppa_ln_cdf(y.ln(), self.alpha, self.delta, self.beta.ln()).exp())
    }

    fn sf(&self, y: f64) -> Result<f64> {
        self.check_support(y)?;
        Ok(-stoppa_ln_cdf(y.ln(), self.alpha, self.delta, self.beta.ln()).exp_m1())
    }

    fn quantile(&self, p: f64) -> Result<f64> {
        check_probability(p)?;
        Ok(self.value_at_ln_cdf(p.ln()))
    }

    fn sf_quantile(&self, q: f64) -> Result<f64> {
        check_probability(q)?;
        Ok(self.value_at_ln_cdf((-q).ln_1p()))
    }

    fn mode(&self) -> Result<f64> {
        if self.alpha <= 1.0 {
            return Err(Error::ModeUndefined {
                family: "Stoppa",
                alpha: self.alpha,
            });
        }
        Ok(self.beta * stoppa_unit_mode(self.alpha, self.delta))
    }
}

// ---------------------------------------------------------------------------
// GlogM

/// Generalized log-Moyal tail with cdf `1 − erf((β/y)^(1/(2α))/√2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlogM {
    alpha: f64,
    beta: f64,
}

#[inline]
pub(crate) fn glogm_ln_pdf(ln_y: f64, alpha: f64, ln_beta: f64) -> f64 {
    let half_inv = 0.5 / alpha;
    let v = ((ln_beta - ln_y) / alpha).exp();
    half_inv * ln_beta - 0.5 * v - LN_SQRT_2PI - alpha.ln() - (half_inv + 1.0) * ln_y
}

/// `(β/y)^(1/(2α))/√2`, the erf argument of the cdf.
#[inline]
fn glogm_erf_arg(ln_y: f64, alpha: f64, ln_beta: f64) -> f64 {
    ((ln_beta - ln_y) * 0.5 / alpha).exp() * std::f64::consts::FRAC_1_SQRT_2
}

pub(crate) fn glogm_unit_mode(alpha: f64) -> f64 {
    (1.0 + 2.0 * alpha).powf(-alpha)
}

impl GlogM {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        check_positive("alpha", alpha)?;
        check_positive("beta", beta)?;
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }

    fn value_at_erf_arg(&self, s: f64) -> f64 {
        // y = β / (√2 s)^(2α)
        self.beta * (-2.0 * self.alpha * (std::f64::consts::SQRT_2 * s).ln()).exp()
    }
}

impl ContinuousDistribution for GlogM {
    fn ln_pdf(&self, y: f64) -> Result<f64> {
        check_y(y)?;
        Ok(glogm_ln_pdf(y.ln(), self.alpha, self.beta.ln()))
    }

    fn cdf(&self, y: f64) -> Result<f64> {
        check_y(y)?;
        Ok(erfc(glogm_erf_arg(y.ln(), self.alpha, self.beta.ln())))
    }

    fn sf(&self, y: f64) -> Result<f64> {
        check_y(y)?;
        Ok(erf(glogm_erf_arg(y.ln(), self.alpha, self.beta.ln())))
    }

    fn quantile(&self, p: f64) -> Result<f64> {
        check_probability(p)?;
        Ok(self.value_at_erf_arg(erfc_inv(p)?))
    }

    fn sf_quantile(&self, q: f64) -> Result<f64> {
        check_probability(q)?;
        Ok(self.value_at_erf_arg(erf_inv(q)?))
    }

    fn mode(&self) -> Result<f64> {
        Ok(self.beta * glogm_unit_mode(self.alpha))
    }
}
