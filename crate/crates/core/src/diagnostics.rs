//! Model selection statistics, coefficient tests and quantile residuals.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::estimation::FitResult;
use crate::parallel::{map_rows, Execution};
use crate::regression::{composites, Dataset, DesignMatrix, ModelParams};
use crate::special::std_normal_quantile;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub nll: f64,
    pub df: usize,
    pub n: usize,
    pub aic: f64,
    pub bic: f64,
}

/// `AIC = 2·NLL + 2·df`, `BIC = 2·NLL + ln(n)·df`.
pub fn selection_report(nll: f64, df: usize, n: usize) -> SelectionReport {
    selection_report_ln_n(nll, df, n, (n as f64).ln())
}

/// Same as [`selection_report`] with `ln n` supplied directly.
pub fn selection_report_ln_n(nll: f64, df: usize, n: usize, ln_n: f64) -> SelectionReport {
    let df_f = df as f64;
    SelectionReport {
        nll,
        df,
        n,
        aic: 2.0 * nll + 2.0 * df_f,
        bic: 2.0 * nll + ln_n * df_f,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTest {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub t_ratio: f64,
    pub p_value: f64,
    pub significant: bool,
}

/// t-ratio and two-sided Student-t p-value with `dof` degrees of freedom.
pub fn t_ratio_test(estimate: f64, std_error: f64, dof: f64) -> Result<(f64, f64)> {
    if !(std_error > 0.0) || !std_error.is_finite() {
        return Err(Error::InvalidParameter {
            name: "std_error",
            value: std_error,
            reason: "must be positive and finite",
        });
    }
    let t = estimate / std_error;
    let dist = StudentsT::new(0.0, 1.0, dof).map_err(|_| Error::InvalidParameter {
        name: "degrees of freedom",
        value: dof,
        reason: "must be positive",
    })?;
    let p = (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0);
    Ok((t, p))
}

/// Tests `H₀: γ_s = 0` for every regression coefficient using `n − p`
/// degrees of freedom. Fails when standard errors are unavailable.
pub fn coefficient_tests(
    fit: &FitResult,
    design: &DesignMatrix,
    alpha_level: f64,
) -> Result<Vec<CoefficientTest>> {
    let se = fit
        .std_errors
        .as_ref()
        .ok_or_else(|| Error::Data("standard errors are unavailable".into()))?;
    let p = design.n_cols();
    let offset = 1 + fit.params.family().n_shapes();
    if fit.params.gamma.len() != p || se.len() != offset + p {
        return Err(Error::Dimension {
            context: "coefficient tests",
            expected: offset + p,
            got: se.len(),
        });
    }
    let dof = fit.n.saturating_sub(p) as f64;
    design
        .column_names()
        .iter()
        .zip(&fit.params.gamma)
        .zip(&se[offset..])
        .map(|((name, &estimate), &std_error)| {
            let (t_ratio, p_value) = t_ratio_test(estimate, std_error, dof)?;
            Ok(CoefficientTest {
                name: name.clone(),
                estimate,
                std_error,
                t_ratio,
                p_value,
                significant: p_value < alpha_level,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSet {
    /// `k_i = Φ⁻¹(F(y_i))`; ±∞ when `F(y_i)` is numerically 0 or 1.
    pub k: Vec<f64>,
    pub cdf: Vec<f64>,
    /// Sorted (theoretical, empirical) pairs over the finite residuals.
    pub qq_pairs: Vec<(f64, f64)>,
    pub excluded: usize,
}

fn residual(cdf: f64, sf: f64) -> Result<f64> {
    if cdf <= 0.0 {
        Ok(f64::NEG_INFINITY)
    } else if sf <= 0.0 {
        Ok(f64::INFINITY)
    } else if cdf <= 0.5 {
        std_normal_quantile(cdf)
    } else {
        // the survival side keeps precision in the upper tail
        Ok(-std_normal_quantile(sf)?)
    }
}

/// `(Φ⁻¹((i − 0.5)/m), k_(i))` for the sorted finite residuals.
pub fn qq_pairs(k: &[f64]) -> Result<Vec<(f64, f64)>> {
    let mut finite: Vec<f64> = k.iter().copied().filter(|v| v.is_finite()).collect();
    finite.sort_by(f64::total_cmp);
    let m = finite.len() as f64;
    finite
        .into_iter()
        .enumerate()
        .map(|(i, e)| Ok((std_normal_quantile((i as f64 + 0.5) / m)?, e)))
        .collect()
}

/// Normalized quantile residuals under the per-row composite cdf.
pub fn quantile_residuals(
    params: &ModelParams,
    dataset: &Dataset,
    design: &DesignMatrix,
) -> Result<ResidualSet> {
    let execution = Execution::default();
    let models = composites(params, design, execution)?;
    let ys = dataset.responses();
    if ys.len() != models.len() {
        return Err(Error::Dimension {
            context: "design rows",
            expected: ys.len(),
            got: models.len(),
        });
    }
    let pairs = map_rows(ys.len(), execution, |i| {
        let c = &models[i];
        let (f, s) = (c.cdf(ys[i])?, c.sf(ys[i])?);
        Ok((f, residual(f, s)?))
    })?;
    let (cdf, k): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let excluded = k.iter().filter(|v| !v.is_finite()).count();
    Ok(ResidualSet {
        qq_pairs: qq_pairs(&k)?,
        k,
        cdf,
        excluded,
    })
}

/// One-sample Kolmogorov-Smirnov distance between `sample` and `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max(f - i as f64 / n).max((i as f64 + 1.0) / n - f)
    })
}

/// KS distance of `k` from the standard normal.
pub fn ks_normal(k: &[f64]) -> f64 {
    ks_statistic(k, crate::special::std_normal_cdf)
}

/// Asymptotic Kolmogorov p-value with Stephens' small-sample correction.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let jf = j as f64;
        let term = (-2.0 * jf * jf * lambda * lambda).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
