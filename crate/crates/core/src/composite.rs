//! Mode-matching composition of a Lognormal head with a Burr, Stoppa or GlogM
//! tail.
//!
//! The splice point `y_mo` is the mode of the tail. Matching the head mode to
//! it fixes the head location `μ = σ² + ln y_mo`, and density continuity at
//! `y_mo` fixes the head weight
//!
//! ```text
//! r = f_T(y_mo) F_H(y_mo) / (f_T(y_mo) F_H(y_mo) + f_H(y_mo) (1 − F_T(y_mo)))
//! ```
//!
//! With μ reduced this way the head is always evaluated at `z_mo = −σ`, so
//! `F_H(y_mo) = Φ(−σ)`. All three tails are scale families, which makes `r`
//! a function of σ and the tail shapes only: it does not move with β.

use serde::{Deserialize, Serialize};

use crate::distributions::{
    burr_unit_mode, check_positive, glogm_unit_mode, stoppa_unit_mode, Burr,
    ContinuousDistribution, GlogM, Stoppa,
};
use crate::error::{Error, Result};
use crate::special::{
    ln_std_normal_cdf, ln_std_normal_pdf, softplus, std_normal_cdf, std_normal_quantile,
};

/// Which tail family is spliced onto the Lognormal head.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailFamily {
    Burr,
    Stoppa,
    #[serde(rename = "glogm")]
    GlogM,
}

impl TailFamily {
    pub const ALL: [TailFamily; 3] = [TailFamily::Burr, TailFamily::Stoppa, TailFamily::GlogM];

    pub fn name(self) -> &'static str {
        match self {
            TailFamily::Burr => "burr",
            TailFamily::Stoppa => "stoppa",
            TailFamily::GlogM => "glogm",
        }
    }

    /// Number of tail shape parameters (α, plus δ for Burr and Stoppa).
    pub fn n_shapes(self) -> usize {
        match self {
            TailFamily::GlogM => 1,
            _ => 2,
        }
    }

    /// Whether β enters the tail as a rate (Burr) rather than a scale.
    pub fn beta_is_rate(self) -> bool {
        matches!(self, TailFamily::Burr)
    }
}

impl std::fmt::Display for TailFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for TailFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "burr" => Ok(TailFamily::Burr),
            "stoppa" => Ok(TailFamily::Stoppa),
            "glogm" => Ok(TailFamily::GlogM),
            other => Err(format!(
                "unknown tail family '{other}' (expected burr, stoppa or glogm)"
            )),
        }
    }
}

/// Tail shape parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailShape {
    Burr { alpha: f64, delta: f64 },
    Stoppa { alpha: f64, delta: f64 },
    GlogM { alpha: f64 },
}

impl TailShape {
    pub fn family(&self) -> TailFamily {
        match self {
            TailShape::Burr { .. } => TailFamily::Burr,
            TailShape::Stoppa { .. } => TailFamily::Stoppa,
            TailShape::GlogM { .. } => TailFamily::GlogM,
        }
    }

    pub fn alpha(&self) -> f64 {
        match *self {
            TailShape::Burr { alpha, .. }
            | TailShape::Stoppa { alpha, .. }
            | TailShape::GlogM { alpha } => alpha,
        }
    }

    pub fn delta(&self) -> Option<f64> {
        match *self {
            TailShape::Burr { delta, .. } | TailShape::Stoppa { delta, .. } => Some(delta),
            TailShape::GlogM { .. } => None,
        }
    }

    /// Builds a shape from `(α, δ)`; δ is ignored for GlogM.
    pub fn from_parts(family: TailFamily, alpha: f64, delta: Option<f64>) -> Result<Self> {
        let need_delta = || {
            delta.ok_or(Error::InvalidParameter {
                name: "delta",
                value: f64::NAN,
                reason: "required for the Burr and Stoppa tails",
            })
        };
        Ok(match family {
            TailFamily::Burr => TailShape::Burr {
                alpha,
                delta: need_delta()?,
            },
            TailFamily::Stoppa => TailShape::Stoppa {
                alpha,
                delta: need_delta()?,
            },
            TailFamily::GlogM => TailShape::GlogM { alpha },
        })
    }

    /// Checks the constraints needed for a mode-matched composite:
    /// α > 1 for Burr and Stoppa, α > 0 for GlogM, δ > 0.
    pub fn validate(&self) -> Result<()> {
        let alpha = self.alpha();
        check_positive("alpha", alpha)?;
        if let Some(delta) = self.delta() {
            check_positive("delta", delta)?;
            if alpha <= 1.0 {
                return Err(Error::ModeUndefined {
                    family: match self.family() {
                        TailFamily::Burr => "Burr",
                        _ => "Stoppa",
                    },
                    alpha,
                });
            }
        }
        Ok(())
    }

    /// Tail mode at β = 1. The mode at general β is this divided by β for
    /// Burr and multiplied by β otherwise.
    pub(crate) fn unit_mode(&self) -> f64 {
        match *self {
            TailShape::Burr { alpha, delta } => burr_unit_mode(alpha, delta),
            TailShape::Stoppa { alpha, delta } => stoppa_unit_mode(alpha, delta),
            TailShape::GlogM { alpha } => glogm_unit_mode(alpha),
        }
    }

    pub fn tail(&self, beta: f64) -> Result<Tail> {
        Ok(match *self {
            TailShape::Burr { alpha, delta } => Tail::Burr(Burr::new(alpha, delta, beta)?),
            TailShape::Stoppa { alpha, delta } => Tail::Stoppa(Stoppa::new(alpha, delta, beta)?),
            TailShape::GlogM { alpha } => Tail::GlogM(GlogM::new(alpha, beta)?),
        })
    }
}

/// A tail distribution with a concrete β.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tail {
    Burr(Burr),
    Stoppa(Stoppa),
    GlogM(GlogM),
}

macro_rules! delegate {
    ($self:ident, $d:ident => $body:expr) => {
        match $self {
            Tail::Burr($d) => $body,
            Tail::Stoppa($d) => $body,
            Tail::GlogM($d) => $body,
        }
    };
}

impl ContinuousDistribution for Tail {
    fn ln_pdf(&self, y: f64) -> Result<f64> {
        delegate!(self, d => d.ln_pdf(y))
    }
    fn cdf(&self, y: f64) -> Result<f64> {
        delegate!(self, d => d.cdf(y))
    }
    fn sf(&self, y: f64) -> Result<f64> {
        delegate!(self, d => d.sf(y))
    }
    fn quantile(&self, p: f64) -> Result<f64> {
        delegate!(self, d => d.quantile(p))
    }
    fn sf_quantile(&self, q: f64) -> Result<f64> {
        delegate!(self, d => d.sf_quantile(q))
    }
    fn mode(&self) -> Result<f64> {
        delegate!(self, d => d.mode())
    }
}

/// Head σ, tail shapes and one value of the tail β.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositeSpec {
    pub sigma: f64,
    pub shape: TailShape,
    pub beta: f64,
}

/// Quantities fixed by mode matching.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositeDerived {
    /// Threshold, equal to the tail mode.
    pub y_mo: f64,
    /// Reduced head location, `σ² + ln y_mo`.
    pub mu: f64,
    /// Head weight, equal to the composite cdf at `y_mo`.
    pub r: f64,
}

/// Head weight from the log-densities and log-masses at the threshold.
/// Returns `(ln r, ln(1 − r))`.
pub(crate) fn log_weights(
    ln_tail_pdf_mo: f64,
    ln_head_mass: f64,
    ln_head_pdf_mo: f64,
    ln_tail_sf_mo: f64,
) -> Result<(f64, f64)> {
    let ln_a = ln_tail_pdf_mo + ln_head_mass;
    let ln_b = ln_head_pdf_mo + ln_tail_sf_mo;
    let d = ln_b - ln_a;
    if !d.is_finite() {
        return Err(Error::NonFinite("mixing weight".into()));
    }
    let ln_r = -softplus(d);
    let ln_1mr = -softplus(-d);
    let r = ln_r.exp();
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::NonFinite(format!("mixing weight r = {r}")));
    }
    Ok((ln_r, ln_1mr))
}

/// Evaluator for one composite density with every threshold quantity
/// precomputed.
#[derive(Debug, Clone, Copy)]
pub struct Composite {
    sigma: f64,
    tail: Tail,
    y_mo: f64,
    ln_y_mo: f64,
    r: f64,
    ln_r: f64,
    ln_one_minus_r: f64,
    head_mass: f64,
    ln_head_mass: f64,
    tail_sf_mo: f64,
    ln_tail_sf_mo: f64,
}

impl Composite {
    pub fn new(spec: &CompositeSpec) -> Result<Self> {
        check_positive("sigma", spec.sigma)?;
        spec.shape.validate()?;
        let tail = spec.shape.tail(spec.beta)?;
        let y_mo = tail.mode()?;
        let sigma = spec.sigma;
        if !(y_mo.is_finite() && y_mo > 0.0) {
            return Err(Error::NonFinite(format!("threshold y_mo = {y_mo}")));
        }
        let ln_y_mo = y_mo.ln();

        let ln_head_mass = ln_std_normal_cdf(-sigma);
        let ln_head_pdf_mo = ln_std_normal_pdf(-sigma) - sigma.ln() - ln_y_mo;
        let tail_sf_mo = tail.sf(y_mo)?;
        let ln_tail_sf_mo = tail_sf_mo.ln();
        let ln_tail_pdf_mo = tail.ln_pdf(y_mo)?;
        let (ln_r, ln_one_minus_r) =
            log_weights(ln_tail_pdf_mo, ln_head_mass, ln_head_pdf_mo, ln_tail_sf_mo)?;

        Ok(Self {
            sigma,
            tail,
            y_mo,
            ln_y_mo,
            r: ln_r.exp(),
            ln_r,
            ln_one_minus_r,
            head_mass: std_normal_cdf(-sigma),
            ln_head_mass,
            tail_sf_mo,
            ln_tail_sf_mo,
        })
    }

    pub fn derived(&self) -> CompositeDerived {
        CompositeDerived {
            y_mo: self.y_mo,
            mu: self.mu(),
            r: self.r,
        }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    pub fn threshold(&self) -> f64 {
        self.y_mo
    }

    pub fn weight(&self) -> f64 {
        self.r
    }

    pub fn mu(&self) -> f64 {
        self.sigma * self.sigma + self.ln_y_mo
    }

    /// Standardized head argument `(ln y − μ)/σ`, written relative to the
    /// threshold so that `z(y_mo) = −σ` exactly.
    #[inline]
    fn head_z(&self, ln_y: f64) -> f64 {
        (ln_y - self.ln_y_mo) / self.sigma - self.sigma
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

    /// Log head branch `ln r + ln f_LN(y) − ln Φ(−σ)`.
    #[inline]
    pub fn ln_head_branch(&self, y: f64) -> f64 {
        let ln_y = y.ln();
        self.ln_r + ln_std_normal_pdf(self.head_z(ln_y))
            - self.sigma.ln()
            - ln_y
            - self.ln_head_mass
    }

    /// Log tail branch `ln(1 − r) + ln f_T(y) − ln(1 − F_T(y_mo))`.
    pub fn ln_tail_branch(&self, y: f64) -> Result<f64> {
        Ok(self.ln_one_minus_r + self.tail.ln_pdf(y)? - self.ln_tail_sf_mo)
    }

    /// Log density; `y = y_mo` belongs to the head.
    pub fn ln_pdf(&self, y: f64) -> Result<f64> {
        Self::check_y(y)?;
        if y <= self.y_mo {
            Ok(self.ln_head_branch(y))
        } else {
            self.ln_tail_branch(y)
        }
    }

    pub fn pdf(&self, y: f64) -> Result<f64> {
        Ok(self.ln_pdf(y)?.exp())
    }

    pub fn cdf(&self, y: f64) -> Result<f64> {
        Self::check_y(y)?;
        if y <= self.y_mo {
            Ok(self.r * (std_normal_cdf(self.head_z(y.ln())) / self.head_mass))
        } else {
            Ok(1.0 - (1.0 - self.r) * (self.tail.sf(y)? / self.tail_sf_mo))
        }
    }

    /// `1 − F(y)`, accurate far into the tail.
    pub fn sf(&self, y: f64) -> Result<f64> {
        Self::check_y(y)?;
        if y <= self.y_mo {
            Ok(1.0 - self.r * (std_normal_cdf(self.head_z(y.ln())) / self.head_mass))
        } else {
            Ok((self.ln_one_minus_r + self.tail.sf(y)?.ln() - self.ln_tail_sf_mo).exp())
        }
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain {
                what: "probability",
                value: p,
            });
        }
        if p == self.r {
            return Ok(self.y_mo);
        }
        if p < self.r {
            let target = (p / self.r) * self.head_mass;
            let z = std_normal_quantile(target)?;
            Ok((self.ln_y_mo + self.sigma * (z + self.sigma))
                .exp()
                .min(self.y_mo))
        } else {
            // survival inside the tail: S_T(y) = S_T(y_mo)(1 − p)/(1 − r)
            let q = self.tail_sf_mo * ((1.0 - p) / (1.0 - self.r));
            if q >= self.tail_sf_mo {
                return Ok(self.y_mo);
            }
            Ok(self.tail.sf_quantile(q)?.max(self.y_mo))
        }
    }
}

/// Threshold, reduced μ and head weight for one spec.
pub fn derive(spec: &CompositeSpec) -> Result<CompositeDerived> {
    Ok(Composite::new(spec)?.derived())
}
