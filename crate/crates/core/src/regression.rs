//! Covariates, the log-link on the tail β, and the regression likelihood.
//!
//! Each observation gets its own `β_i = exp(γᵀx_i)`, hence its own threshold
//! `y_mo,i`. Categorical covariates are treatment coded against their first
//! declared level; numeric covariates enter unscaled.

use nalgebra::DMatrix;

use crate::composite::{Composite, CompositeSpec, TailFamily, TailShape};
use crate::distributions::{burr_ln_pdf, check_positive, glogm_ln_pdf, stoppa_ln_pdf};
use crate::error::{Error, Result};
use crate::parallel::{chunked_sum, map_rows, Execution};
use crate::special::ln_std_normal_pdf;

/// Largest |γᵀx| accepted before β is treated as overflowed.
const MAX_LINEAR_PREDICTOR: f64 = 700.0;

#[derive(Debug, Clone, PartialEq)]
pub enum CovariateValues {
    Numeric(Vec<f64>),
    Categorical {
        levels: Vec<String>,
        codes: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Covariate {
    pub name: String,
    pub values: CovariateValues,
}

impl Covariate {
    pub fn numeric(name: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            values: CovariateValues::Numeric(values),
        }
    }

    pub fn categorical(name: impl Into<String>, levels: Vec<String>, codes: Vec<usize>) -> Self {
        Self {
            name: name.into(),
            values: CovariateValues::Categorical { levels, codes },
        }
    }

    /// Categorical covariate from raw labels. Without declared levels the
    /// distinct labels are sorted and the smallest becomes the reference.
    pub fn categorical_from_labels<S: AsRef<str>>(
        name: impl Into<String>,
        levels: Option<Vec<String>>,
        labels: &[S],
    ) -> Result<Self> {
        let name = name.into();
        let levels = match levels {
            Some(levels) => levels,
            None => {
                let mut distinct: Vec<String> =
                    labels.iter().map(|s| s.as_ref().to_string()).collect();
                distinct.sort();
                distinct.dedup();
                distinct
            }
        };
        let codes = labels
            .iter()
            .enumerate()
            .map(|(i, label)| {
                levels
                    .iter()
                    .position(|l| l == label.as_ref())
                    .ok_or_else(|| {
                        Error::Data(format!(
                            "row {}: level '{}' of '{}' is not declared",
                            i + 1,
                            label.as_ref(),
                            name
                        ))
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::categorical(name, levels, codes))
    }

    pub fn len(&self) -> usize {
        match &self.values {
            CovariateValues::Numeric(v) => v.len(),
            CovariateValues::Categorical { codes, .. } => codes.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Positive responses with aligned covariate columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    responses: Vec<f64>,
    covariates: Vec<Covariate>,
}

impl Dataset {
    pub fn new(responses: Vec<f64>, covariates: Vec<Covariate>) -> Result<Self> {
        if responses.is_empty() {
            return Err(Error::Data("dataset has no rows".into()));
        }
        if let Some(i) = responses.iter().position(|y| !(y.is_finite() && *y > 0.0)) {
            return Err(Error::Domain {
                what: "response",
                value: responses[i],
            }
            .at_row(i + 1));
        }
        let n = responses.len();
        for c in &covariates {
            if c.len() != n {
                return Err(Error::Data(format!(
                    "covariate '{}' has {} rows, responses have {n}",
                    c.name,
                    c.len()
                )));
            }
            match &c.values {
                CovariateValues::Numeric(v) => {
                    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
                        return Err(Error::Data(format!(
                            "row {}: covariate '{}' is not finite",
                            i + 1,
                            c.name
                        )));
                    }
                }
                CovariateValues::Categorical { levels, codes } => {
                    if levels.is_empty() {
                        return Err(Error::Data(format!("covariate '{}' has no levels", c.name)));
                    }
                    if let Some(i) = codes.iter().position(|&k| k >= levels.len()) {
                        return Err(Error::Data(format!(
                            "row {}: covariate '{}' has an undeclared level",
                            i + 1,
                            c.name
                        )));
                    }
                }
            }
        }
        for (i, c) in covariates.iter().enumerate() {
            if covariates[..i].iter().any(|o| o.name == c.name) {
                return Err(Error::Data(format!("duplicate covariate '{}'", c.name)));
            }
        }
        Ok(Self {
            responses,
            covariates,
        })
    }

    pub fn n(&self) -> usize {
        self.responses.len()
    }

    pub fn responses(&self) -> &[f64] {
        &self.responses
    }

    pub fn covariates(&self) -> &[Covariate] {
        &self.covariates
    }

    pub fn covariate(&self, name: &str) -> Option<&Covariate> {
        self.covariates.iter().find(|c| c.name == name)
    }

    /// Same covariates, new responses.
    pub fn with_responses(&self, responses: Vec<f64>) -> Result<Self> {
        Dataset::new(responses, self.covariates.clone())
    }
}

/// Where a design column came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnSource {
    Intercept,
    Numeric { covariate: String },
    Level { covariate: String, level: String },
}

/// Row-major `n × p` design with an intercept in column 0.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    n: usize,
    p: usize,
    values: Vec<f64>,
    column_names: Vec<String>,
    sources: Vec<ColumnSource>,
}

impl DesignMatrix {
    pub fn intercept_only(n: usize) -> Self {
        Self {
            n,
            p: 1,
            values: vec![1.0; n],
            column_names: vec!["Intercept".into()],
            sources: vec![ColumnSource::Intercept],
        }
    }

    /// Builds a design from explicit rows; the first column must be all ones.
    pub fn from_rows(column_names: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let p = column_names.len();
        if p == 0 {
            return Err(Error::Data(
                "design needs at least the intercept column".into(),
            ));
        }
        let mut values = Vec::with_capacity(rows.len() * p);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(Error::Dimension {
                    context: "design row",
                    expected: p,
                    got: row.len(),
                }
                .at_row(i + 1));
            }
            if row[0] != 1.0 {
                return Err(Error::Data(format!(
                    "row {}: intercept column must be 1",
                    i + 1
                )));
            }
            values.extend_from_slice(row);
        }
        let sources = column_names
            .iter()
            .enumerate()
            .map(|(j, name)| {
                if j == 0 {
                    ColumnSource::Intercept
                } else {
                    ColumnSource::Numeric {
                        covariate: name.clone(),
                    }
                }
            })
            .collect();
        Ok(Self {
            n: rows.len(),
            p,
            values,
            column_names,
            sources,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n
    }

    pub fn n_cols(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.p..(i + 1) * self.p]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.values[i * self.p + j]).collect()
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn sources(&self) -> &[ColumnSource] {
        &self.sources
    }

    /// z-scores every numeric column with nonzero spread.
    pub fn standardize_numeric(&self) -> (DesignMatrix, Standardization) {
        let mut out = self.clone();
        let mut columns = Vec::new();
        for (j, source) in self.sources.iter().enumerate() {
            if !matches!(source, ColumnSource::Numeric { .. }) {
                continue;
            }
            let col = self.column(j);
            let n = col.len() as f64;
            let mean = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
            let sd = var.sqrt();
            if !(sd > 0.0) {
                continue;
            }
            for (i, x) in col.iter().enumerate() {
                out.values[i * self.p + j] = (x - mean) / sd;
            }
            columns.push(StandardizedColumn { index: j, mean, sd });
        }
        (out, Standardization { p: self.p, columns })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandardizedColumn {
    pub index: usize,
    pub mean: f64,
    pub sd: f64,
}

/// Record of a numeric z-scoring, used to map coefficients back.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardization {
    p: usize,
    columns: Vec<StandardizedColumn>,
}

impl Standardization {
    pub fn columns(&self) -> &[StandardizedColumn] {
        &self.columns
    }

    /// Coefficients on the original covariate scale.
    pub fn gamma_to_original(&self, gamma: &[f64]) -> Vec<f64> {
        let mut out = gamma.to_vec();
        for c in &self.columns {
            out[c.index] = gamma[c.index] / c.sd;
            out[0] -= gamma[c.index] * c.mean / c.sd;
        }
        out
    }

    /// `∂γ_original / ∂γ_standardized`, a `p × p` matrix.
    pub fn jacobian(&self) -> DMatrix<f64> {
        let mut j = DMatrix::identity(self.p, self.p);
        for c in &self.columns {
            j[(c.index, c.index)] = 1.0 / c.sd;
            j[(0, c.index)] = -c.mean / c.sd;
        }
        j
    }
}

/// Intercept plus treatment-coded design for the named covariates.
pub fn encode<S: AsRef<str>>(dataset: &Dataset, formula: &[S]) -> Result<DesignMatrix> {
    let n = dataset.n();
    let mut column_names = vec!["Intercept".to_string()];
    let mut sources = vec![ColumnSource::Intercept];
    let mut columns: Vec<Vec<f64>> = vec![vec![1.0; n]];

    for (k, name) in formula.iter().enumerate() {
        let name = name.as_ref();
        if formula[..k].iter().any(|o| o.as_ref() == name) {
            return Err(Error::Data(format!("covariate '{name}' listed twice")));
        }
        let cov = dataset
            .covariate(name)
            .ok_or_else(|| Error::UnknownCovariate(name.to_string()))?;
        match &cov.values {
            CovariateValues::Numeric(v) => {
                column_names.push(name.to_string());
                sources.push(ColumnSource::Numeric {
                    covariate: name.to_string(),
                });
                columns.push(v.clone());
            }
            CovariateValues::Categorical { levels, codes } => {
                let mut seen = vec![false; levels.len()];
                for &c in codes {
                    seen[c] = true;
                }
                if levels.len() > 1 && seen.iter().filter(|s| **s).count() == 1 {
                    return Err(Error::Data(format!(
                        "categorical '{name}' takes a single level in the data but declares {}",
                        levels.len()
                    )));
                }
                for (l, level) in levels.iter().enumerate().skip(1) {
                    column_names.push(format!("{name}:{level}"));
                    sources.push(ColumnSource::Level {
                        covariate: name.to_string(),
                        level: level.clone(),
                    });
                    columns.push(
                        codes
                            .iter()
                            .map(|&c| if c == l { 1.0 } else { 0.0 })
                            .collect(),
                    );
                }
            }
        }
    }

    let p = columns.len();
    let mut values = Vec::with_capacity(n * p);
    for i in 0..n {
        values.extend(columns.iter().map(|c| c[i]));
    }
    Ok(DesignMatrix {
        n,
        p,
        values,
        column_names,
        sources,
    })
}

/// Linear predictor `γᵀx`, checked.
pub fn linear_predictor(design_row: &[f64], gamma: &[f64]) -> Result<f64> {
    if design_row.len() != gamma.len() {
        return Err(Error::Dimension {
            context: "coefficients",
            expected: design_row.len(),
            got: gamma.len(),
        });
    }
    let eta: f64 = design_row.iter().zip(gamma).map(|(x, g)| x * g).sum();
    if !eta.is_finite() || eta.abs() > MAX_LINEAR_PREDICTOR {
        return Err(Error::NonFinite(format!("linear predictor {eta}")));
    }
    Ok(eta)
}

/// `β = exp(γᵀx)`.
pub fn link_beta(design_row: &[f64], gamma: &[f64]) -> Result<f64> {
    Ok(linear_predictor(design_row, gamma)?.exp())
}

/// Full parameter vector: head σ, tail shapes, and regression coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub sigma: f64,
    pub shape: TailShape,
    pub gamma: Vec<f64>,
}

impl ModelParams {
    pub fn family(&self) -> TailFamily {
        self.shape.family()
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("sigma", self.sigma)?;
        self.shape.validate()?;
        if let Some(j) = self.gamma.iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFinite(format!("coefficient {j}")));
        }
        Ok(())
    }

    /// Number of free parameters: σ, the tail shapes and `p` coefficients.
    pub fn n_free(&self) -> usize {
        1 + self.family().n_shapes() + self.gamma.len()
    }

    /// `(σ, α[, δ], γ₁, …, γ_p)`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = vec![self.sigma, self.shape.alpha()];
        v.extend(self.shape.delta());
        v.extend_from_slice(&self.gamma);
        v
    }

    /// Inverse of [`ModelParams::to_vec`]. Does not validate.
    pub fn from_vec(family: TailFamily, v: &[f64]) -> Result<Self> {
        let k = 1 + family.n_shapes();
        if v.len() <= k {
            return Err(Error::Dimension {
                context: "parameter vector",
                expected: k + 1,
                got: v.len(),
            });
        }
        let delta = (family.n_shapes() == 2).then(|| v[2]);
        Ok(Self {
            sigma: v[0],
            shape: TailShape::from_parts(family, v[1], delta)?,
            gamma: v[k..].to_vec(),
        })
    }

    /// Labels matching [`ModelParams::to_vec`].
    pub fn parameter_names(&self, design: &DesignMatrix) -> Vec<String> {
        let mut names = vec!["sigma".to_string(), "alpha".to_string()];
        if self.shape.delta().is_some() {
            names.push("delta".into());
        }
        names.extend(design.column_names().iter().cloned());
        names
    }

    pub fn spec_for_row(&self, design: &DesignMatrix, i: usize) -> Result<CompositeSpec> {
        Ok(CompositeSpec {
            sigma: self.sigma,
            shape: self.shape,
            beta: link_beta(design.row(i), &self.gamma)?,
        })
    }
}

/// Mode-matching quantities for one observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerObservationComposite {
    pub beta: f64,
    pub y_mo: f64,
    pub mu: f64,
    pub r: f64,
}

fn check_design(params: &ModelParams, design: &DesignMatrix) -> Result<()> {
    if params.gamma.len() != design.n_cols() {
        return Err(Error::Dimension {
            context: "coefficients",
            expected: design.n_cols(),
            got: params.gamma.len(),
        });
    }
    Ok(())
}

/// Per-row composite evaluators. Errors carry the 1-based row.
pub fn composites(
    params: &ModelParams,
    design: &DesignMatrix,
    execution: Execution,
) -> Result<Vec<Composite>> {
    params.validate()?;
    check_design(params, design)?;
    map_rows(design.n_rows(), execution, |i| {
        params
            .spec_for_row(design, i)
            .and_then(|spec| Composite::new(&spec))
            .map_err(|e| e.at_row(i + 1))
    })
}

pub fn per_observation(
    params: &ModelParams,
    design: &DesignMatrix,
) -> Result<Vec<PerObservationComposite>> {
    params.validate()?;
    check_design(params, design)?;
    map_rows(design.n_rows(), Execution::default(), |i| {
        let spec = params
            .spec_for_row(design, i)
            .map_err(|e| e.at_row(i + 1))?;
        let d = Composite::new(&spec)
            .map_err(|e| e.at_row(i + 1))?
            .derived();
        Ok(PerObservationComposite {
            beta: spec.beta,
            y_mo: d.y_mo,
            mu: d.mu,
            r: d.r,
        })
    })
}

/// Row-independent pieces of the log-likelihood.
///
/// The head weight, `ln Φ(−σ)` and `ln(1 − F_T(y_mo))` do not depend on β,
/// so only the threshold and the tail density are evaluated per row.
#[derive(Debug, Clone, Copy)]
struct LikelihoodKernel {
    shape: TailShape,
    sigma: f64,
    ln_sigma: f64,
    ln_unit_mode: f64,
    beta_sign: f64,
    ln_r: f64,
    ln_one_minus_r: f64,
    ln_head_mass: f64,
    ln_tail_sf_mo: f64,
}

impl LikelihoodKernel {
    fn new(params: &ModelParams) -> Result<Self> {
        params.validate()?;
        let unit = Composite::new(&CompositeSpec {
            sigma: params.sigma,
            shape: params.shape,
            beta: 1.0,
        })?;
        let y_mo = unit.threshold();
        let tail_sf_mo = crate::distributions::ContinuousDistribution::sf(unit.tail(), y_mo)?;
        let r = unit.weight();
        let sigma = params.sigma;
        Ok(Self {
            shape: params.shape,
            sigma,
            ln_sigma: sigma.ln(),
            ln_unit_mode: y_mo.ln(),
            beta_sign: if params.family().beta_is_rate() {
                -1.0
            } else {
                1.0
            },
            ln_r: r.ln(),
            ln_one_minus_r: (-r).ln_1p(),
            ln_head_mass: crate::special::ln_std_normal_cdf(-sigma),
            ln_tail_sf_mo: tail_sf_mo.ln(),
        })
    }

    #[inline]
    fn ln_threshold(&self, ln_beta: f64) -> f64 {
        self.ln_unit_mode + self.beta_sign * ln_beta
    }

    /// Log density with the likelihood's tie rule: `y ≥ y_mo` uses the tail.
    #[inline]
    fn ln_density(&self, y: f64, ln_beta: f64) -> f64 {
        let ln_y = y.ln();
        let ln_y_mo = self.ln_threshold(ln_beta);
        if ln_y < ln_y_mo {
            let z = (ln_y - ln_y_mo) / self.sigma - self.sigma;
            self.ln_r + ln_std_normal_pdf(z) - self.ln_sigma - ln_y - self.ln_head_mass
        } else {
            let ln_tail = match self.shape {
                TailShape::Burr { alpha, delta } => burr_ln_pdf(ln_y, alpha, delta, ln_beta),
                TailShape::Stoppa { alpha, delta } => stoppa_ln_pdf(ln_y, alpha, delta, ln_beta),
                TailShape::GlogM { alpha } => glogm_ln_pdf(ln_y, alpha, ln_beta),
            };
            self.ln_one_minus_r + ln_tail - self.ln_tail_sf_mo
        }
    }
}

fn check_alignment(responses: &[f64], design: &DesignMatrix) -> Result<()> {
    if responses.len() != design.n_rows() {
        return Err(Error::Dimension {
            context: "design rows",
            expected: responses.len(),
            got: design.n_rows(),
        });
    }
    Ok(())
}

/// Negative log-likelihood `−Σ ln f(y_i)`.
pub fn neg_log_likelihood(
    params: &ModelParams,
    dataset: &Dataset,
    design: &DesignMatrix,
) -> Result<f64> {
    neg_log_likelihood_with(params, dataset.responses(), design, Execution::default())
}

/// [`neg_log_likelihood`] on raw responses with explicit scheduling.
/// The result is bit-identical for either [`Execution`].
pub fn neg_log_likelihood_with(
    params: &ModelParams,
    responses: &[f64],
    design: &DesignMatrix,
    execution: Execution,
) -> Result<f64> {
    check_alignment(responses, design)?;
    check_design(params, design)?;
    let kernel = LikelihoodKernel::new(params)?;
    let total = chunked_sum(responses.len(), execution, |i| {
        let ln_beta =
            linear_predictor(design.row(i), &params.gamma).map_err(|e| e.at_row(i + 1))?;
        let term = kernel.ln_density(responses[i], ln_beta);
        if term.is_finite() {
            Ok(term)
        } else {
            Err(Error::NonFinite(format!("log-density {term}")).at_row(i + 1))
        }
    })?;
    Ok(-total)
}

/// How many observations fall in each likelihood branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BranchCounts {
    pub head: usize,
    pub tail: usize,
}

pub fn branch_counts(
    params: &ModelParams,
    dataset: &Dataset,
    design: &DesignMatrix,
) -> Result<BranchCounts> {
    check_alignment(dataset.responses(), design)?;
    check_design(params, design)?;
    let kernel = LikelihoodKernel::new(params)?;
    let mut counts = BranchCounts { head: 0, tail: 0 };
    for (i, &y) in dataset.responses().iter().enumerate() {
        let ln_beta =
            linear_predictor(design.row(i), &params.gamma).map_err(|e| e.at_row(i + 1))?;
        if y.ln() < kernel.ln_threshold(ln_beta) {
            counts.head += 1;
        } else {
            counts.tail += 1;
        }
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cc_dataset() -> Dataset {
        let levels: Vec<String> = ["C1", "C2", "C3"].iter().map(|s| s.to_string()).collect();
        Dataset::new(
            vec![1.0, 2.0, 0.5, 3.0],
            vec![
                Covariate::categorical("cc", levels, vec![0, 2, 1, 0]),
                Covariate::numeric("age", vec![3.0, 10.0, 1.0, 7.0]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn treatment_coding_uses_first_level_as_reference() {
        let d = encode(&cc_dataset(), &["cc", "age"]).unwrap();
        assert_eq!(d.column_names(), &["Intercept", "cc:C2", "cc:C3", "age"]);
        assert_eq!(d.row(0), &[1.0, 0.0, 0.0, 3.0]);
        assert_eq!(d.row(1), &[1.0, 0.0, 1.0, 10.0]);
        assert_eq!(d.row(2), &[1.0, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn encode_errors() {
        let ds = cc_dataset();
        assert!(matches!(
            encode(&ds, &["nope"]),
            Err(Error::UnknownCovariate(_))
        ));
        let levels: Vec<String> = ["a", "b"].iter().map(|s| s.to_string()).collect();
        let single = Dataset::new(
            vec![1.0, 2.0],
            vec![Covariate::categorical("k", levels, vec![1, 1])],
        )
        .unwrap();
        assert!(matches!(encode(&single, &["k"]), Err(Error::Data(_))));
    }

    #[test]
    fn mtpl_shaped_design_has_eight_columns() {
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        let ds = Dataset::new(
            vec![1.0; 4],
            vec![
                Covariate::categorical("CC", s(&["1", "2", "3", "4"]), vec![0, 1, 2, 3]),
                Covariate::categorical(
                    "Policy-Type",
                    s(&["Economic", "Middle", "Expensive"]),
                    vec![0, 1, 2, 0],
                ),
                Covariate::numeric("Vehicle Age", vec![1.0, 2.0, 3.0, 4.0]),
                Covariate::numeric("MTPL Cost", vec![1.0, 2.0, 3.0, 4.0]),
            ],
        )
        .unwrap();
        let d = encode(&ds, &["CC", "Policy-Type", "Vehicle Age", "MTPL Cost"]).unwrap();
        assert_eq!(d.n_cols(), 8);
    }

    #[test]
    fn link_beta_values() {
        assert_eq!(link_beta(&[1.0, 3.0], &[0.0, 0.0]).unwrap(), 1.0);
        assert!((link_beta(&[1.0], &[2f64.ln()]).unwrap() - 2.0).abs() < 1e-15);
        assert!(
            (link_beta(&[1.0, 1.0], &[1.0, 1.0]).unwrap() - 7.389_056_098_930_65).abs() < 1e-13
        );
        assert!(matches!(
            link_beta(&[1.0], &[1e6]),
            Err(Error::NonFinite(_))
        ));
        assert!(link_beta(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn dataset_rejects_nonpositive_response() {
        let err = Dataset::new(vec![1.0, 0.0], vec![]).unwrap_err();
        assert!(matches!(err, Error::Row { row: 2, .. }));
    }

    #[test]
    fn params_vector_round_trip() {
        let p = ModelParams {
            sigma: 0.7,
            shape: TailShape::Stoppa {
                alpha: 3.0,
                delta: 0.4,
            },
            gamma: vec![0.1, -0.2],
        };
        let v = p.to_vec();
        assert_eq!(v, vec![0.7, 3.0, 0.4, 0.1, -0.2]);
        assert_eq!(ModelParams::from_vec(TailFamily::Stoppa, &v).unwrap(), p);
        assert_eq!(p.n_free(), 5);
    }

    #[test]
    fn standardization_maps_back_to_original_coefficients() {
        let ds = cc_dataset();
        let design = encode(&ds, &["cc", "age"]).unwrap();
        let (z, st) = design.standardize_numeric();
        let gamma_std = [0.3, -0.1, 0.2, 0.5];
        let gamma = st.gamma_to_original(&gamma_std);
        for i in 0..design.n_rows() {
            let a = linear_predictor(z.row(i), &gamma_std).unwrap();
            let b = linear_predictor(design.row(i), &gamma).unwrap();
            assert!((a - b).abs() < 1e-14);
        }
        let j = st.jacobian();
        let mapped = &j * nalgebra::DVector::from_column_slice(&gamma_std);
        for (x, y) in mapped.iter().zip(&gamma) {
            assert!((x - y).abs() < 1e-15);
        }
    }
}
