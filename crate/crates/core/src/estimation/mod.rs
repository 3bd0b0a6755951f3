//! Maximum-likelihood fitting.
//!
//! The optimizer works on unconstrained coordinates (`ln σ`, `ln(α−1)` or
//! `ln α`, `ln δ`, γ). Standard errors come from the numerical Hessian of the
//! negative log-likelihood on the natural parameter scale at the optimum.

pub mod bfgs;
pub mod numdiff;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::composite::{TailFamily, TailShape};
use crate::error::{Error, Result};
use crate::parallel::{map_jobs, Execution};
use crate::regression::{neg_log_likelihood_with, Dataset, DesignMatrix, ModelParams};

pub use bfgs::{minimize, BfgsOptions, BfgsOutcome, Termination};
pub use numdiff::{central_gradient, numerical_hessian, StepRule};

/// Unconstrained optimizer coordinates `(σ̃, α̃[, δ̃], γ₁, …, γ_p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedParams {
    pub family: TailFamily,
    pub values: Vec<f64>,
}

fn shape_offset(family: TailFamily) -> f64 {
    match family {
        TailFamily::Burr | TailFamily::Stoppa => 1.0,
        TailFamily::GlogM => 0.0,
    }
}

pub fn to_unconstrained(params: &ModelParams) -> Result<TransformedParams> {
    let family = params.family();
    if !(params.sigma > 0.0) || !params.sigma.is_finite() {
        return Err(Error::InvalidParameter {
            name: "sigma",
            value: params.sigma,
            reason: "must be positive and finite",
        });
    }
    let alpha = params.shape.alpha();
    if !(alpha > shape_offset(family)) || !alpha.is_finite() {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
            reason: if family == TailFamily::GlogM {
                "must be positive"
            } else {
                "must exceed 1"
            },
        });
    }
    params.validate()?;
    let mut values = vec![params.sigma.ln(), (alpha - shape_offset(family)).ln()];
    values.extend(params.shape.delta().map(f64::ln));
    values.extend_from_slice(&params.gamma);
    Ok(TransformedParams { family, values })
}

pub fn from_unconstrained(t: &TransformedParams) -> Result<ModelParams> {
    if let Some(j) = t.values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("transformed parameter {j}")));
    }
    let k = 1 + t.family.n_shapes();
    if t.values.len() <= k {
        return Err(Error::Dimension {
            context: "transformed parameter vector",
            expected: k + 1,
            got: t.values.len(),
        });
    }
    let v = &t.values;
    let delta = (t.family.n_shapes() == 2).then(|| v[2].exp());
    let params = ModelParams {
        sigma: v[0].exp(),
        shape: TailShape::from_parts(t.family, v[1].exp() + shape_offset(t.family), delta)?,
        gamma: v[k..].to_vec(),
    };
    params.validate()?;
    Ok(params)
}

/// Optimizer settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitControls {
    pub max_iterations: usize,
    pub grad_tol: f64,
    pub rel_tol: f64,
    /// Number of starting points: the initial value plus jittered copies.
    pub n_starts: usize,
    pub seed: u64,
    /// Standard deviation of the jitter in transformed coordinates.
    pub jitter: f64,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for FitControls {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            grad_tol: 1e-6,
            rel_tol: 1e-10,
            n_starts: 5,
            seed: 0x5eed_2024,
            jitter: 0.5,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: ModelParams,
    pub parameter_names: Vec<String>,
    /// Inverse Hessian on the natural scale; `None` when the Hessian is not
    /// positive definite or could not be evaluated.
    pub covariance: Option<DMatrix<f64>>,
    pub std_errors: Option<Vec<f64>>,
    pub nll: f64,
    pub n: usize,
    pub converged: bool,
    pub iterations: usize,
    /// Gradient ∞-norm in optimizer coordinates at the reported point.
    pub gradient_norm: f64,
    pub termination: Termination,
    pub starts: usize,
    /// Number of numerically distinct optima reached by converged starts.
    pub distinct_optima: usize,
}

impl FitResult {
    pub fn df(&self) -> usize {
        self.params.n_free()
    }
}

/// Mode of `y` estimated from a histogram with logarithmically spaced bins,
/// using counts per unit of `y`. Falls back to the median when no bin holds
/// enough points.
pub fn empirical_mode(responses: &[f64]) -> f64 {
    let mut logs: Vec<f64> = responses
        .iter()
        .filter(|y| **y > 0.0 && y.is_finite())
        .map(|y| y.ln())
        .collect();
    if logs.is_empty() {
        return 1.0;
    }
    logs.sort_by(f64::total_cmp);
    let n = logs.len();
    let median = if n % 2 == 1 {
        logs[n / 2]
    } else {
        0.5 * (logs[n / 2 - 1] + logs[n / 2])
    }
    .exp();
    let (lo, hi) = (logs[0], logs[n - 1]);
    if !(hi > lo) {
        return median;
    }
    let bins = ((2.0 * (n as f64).cbrt()).ceil() as usize).clamp(10, 60);
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &l in &logs {
        counts[(((l - lo) / width) as usize).min(bins - 1)] += 1;
    }
    let min_count = 5.max(n / 200);
    let mut best: Option<(f64, usize)> = None;
    for (b, &c) in counts.iter().enumerate() {
        if c < min_count {
            continue;
        }
        let a = lo + b as f64 * width;
        let density = c as f64 / ((a + width).exp() - a.exp());
        if best.is_none_or(|(d, _)| density > d) {
            best = Some((density, b));
        }
    }
    match best {
        Some((_, b)) => (lo + (b as f64 + 0.5) * width).exp(),
        None => median,
    }
}

/// Starting values: σ₀ is the standard deviation of `ln y`, shapes are
/// `α₀ = 2, δ₀ = 1` (Burr, Stoppa) or `α₀ = 1` (GlogM), and the intercept
/// places every row's threshold at the empirical mode.
pub fn default_init(family: TailFamily, responses: &[f64], design: &DesignMatrix) -> ModelParams {
    let logs: Vec<f64> = responses.iter().map(|y| y.ln()).collect();
    let n = logs.len() as f64;
    let mean = logs.iter().sum::<f64>() / n;
    let var = logs.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    let sigma = if var.is_finite() && var > 0.0 {
        var.sqrt().max(0.1)
    } else {
        1.0
    };
    let shape = match family {
        TailFamily::Burr => TailShape::Burr {
            alpha: 2.0,
            delta: 1.0,
        },
        TailFamily::Stoppa => TailShape::Stoppa {
            alpha: 2.0,
            delta: 1.0,
        },
        TailFamily::GlogM => TailShape::GlogM { alpha: 1.0 },
    };
    let ln_unit_mode = shape.unit_mode().ln();
    let ln_mode = empirical_mode(responses).ln();
    let intercept = if family.beta_is_rate() {
        ln_unit_mode - ln_mode
    } else {
        ln_mode - ln_unit_mode
    };
    let mut gamma = vec![0.0; design.n_cols()];
    if let Some(g) = gamma.first_mut() {
        *g = intercept;
    }
    ModelParams {
        sigma,
        shape,
        gamma,
    }
}

fn distinct_optima(outcomes: &[BfgsOutcome]) -> usize {
    let mut values: Vec<f64> = outcomes
        .iter()
        .filter(|o| o.termination.is_converged() && o.value.is_finite())
        .map(|o| o.value)
        .collect();
    values.sort_by(f64::total_cmp);
    let mut count = 0;
    let mut last: Option<f64> = None;
    for v in values {
        if last.is_none_or(|l| v - l > 1e-6 * l.abs().max(1.0)) {
            count += 1;
            last = Some(v);
        }
    }
    count
}

/// Covariance as the inverse of a positive definite Hessian.
pub fn covariance_from_hessian(hessian: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let chol = hessian.clone().cholesky()?;
    let cov = chol.inverse();
    let sym = (&cov + cov.transpose()) * 0.5;
    (0..sym.nrows()).all(|i| sym[(i, i)] > 0.0).then_some(sym)
}

/// Numerical Hessian of the negative log-likelihood on the natural scale.
pub fn nll_hessian(
    params: &ModelParams,
    responses: &[f64],
    design: &DesignMatrix,
    execution: Execution,
) -> Result<DMatrix<f64>> {
    let family = params.family();
    let objective = |v: &[f64]| {
        ModelParams::from_vec(family, v)
            .and_then(|p| neg_log_likelihood_with(&p, responses, design, execution))
            .unwrap_or(f64::NAN)
    };
    numerical_hessian(&objective, &params.to_vec(), StepRule::default())
}

/// Maximizes the likelihood from `init` (or [`default_init`]) plus
/// `n_starts − 1` jittered starts. The best start wins by (NLL, start index).
pub fn fit(
    dataset: &Dataset,
    design: &DesignMatrix,
    family: TailFamily,
    init: Option<&ModelParams>,
    controls: &FitControls,
) -> Result<FitResult> {
    let responses = dataset.responses();
    if design.n_rows() != responses.len() {
        return Err(Error::Dimension {
            context: "design rows",
            expected: responses.len(),
            got: design.n_rows(),
        });
    }
    let init = match init {
        Some(p) if p.family() != family => {
            return Err(Error::Data(format!(
                "initial values are for the {} tail, not {family}",
                p.family()
            )))
        }
        Some(p) => p.clone(),
        None => default_init(family, responses, design),
    };
    let t0 = to_unconstrained(&init)?;
    let execution = controls.execution;
    neg_log_likelihood_with(&init, responses, design, execution)?;

    let objective = |v: &[f64]| {
        from_unconstrained(&TransformedParams {
            family,
            values: v.to_vec(),
        })
        .and_then(|p| neg_log_likelihood_with(&p, responses, design, execution))
        .unwrap_or(f64::INFINITY)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(controls.seed);
    let jitter =
        Normal::new(0.0, controls.jitter.max(0.0)).map_err(|_| Error::InvalidParameter {
            name: "jitter",
            value: controls.jitter,
            reason: "must be finite and nonnegative",
        })?;
    let starts: Vec<Vec<f64>> = (0..controls.n_starts.max(1))
        .map(|s| {
            if s == 0 {
                t0.values.clone()
            } else {
                t0.values
                    .iter()
                    .map(|v| v + jitter.sample(&mut rng))
                    .collect()
            }
        })
        .collect();

    let options = BfgsOptions {
        max_iterations: controls.max_iterations,
        grad_tol: controls.grad_tol,
        rel_tol: controls.rel_tol,
    };
    let outcomes = map_jobs(&starts, execution, |_, x0| {
        minimize(&objective, x0, &options)
    });
    let (_, best) = outcomes
        .iter()
        .enumerate()
        .filter(|(_, o)| o.value.is_finite())
        .min_by(|(i, a), (j, b)| a.value.total_cmp(&b.value).then(i.cmp(j)))
        .ok_or_else(|| Error::NonFinite("objective at every starting point".into()))?;

    let params = from_unconstrained(&TransformedParams {
        family,
        values: best.x.clone(),
    })?;
    let nll = neg_log_likelihood_with(&params, responses, design, execution)?;
    let gradient_norm = best.gradient_norm();
    let converged = best.termination.is_converged()
        || (best.termination == Termination::LineSearch
            && gradient_norm <= 1e-4 * nll.abs().max(1.0));

    let covariance = nll_hessian(&params, responses, design, execution)
        .ok()
        .and_then(|h| covariance_from_hessian(&h));
    let std_errors = covariance
        .as_ref()
        .map(|c| (0..c.nrows()).map(|i| c[(i, i)].sqrt()).collect());

    Ok(FitResult {
        parameter_names: params.parameter_names(design),
        params,
        covariance,
        std_errors,
        nll,
        n: responses.len(),
        converged,
        iterations: best.iterations,
        gradient_norm,
        termination: best.termination,
        starts: starts.len(),
        distinct_optima: distinct_optima(&outcomes),
    })
}

/// Fits on a design whose numeric columns are centred and scaled, then maps
/// the estimates and covariance back to the original columns.
pub fn fit_standardized(
    dataset: &Dataset,
    design: &DesignMatrix,
    family: TailFamily,
    controls: &FitControls,
) -> Result<FitResult> {
    let (scaled, standardization) = design.standardize_numeric();
    let mut result = fit(dataset, &scaled, family, None, controls)?;
    let k = 1 + family.n_shapes();
    let gamma = standardization.gamma_to_original(&result.params.gamma);
    result.params.gamma = gamma;
    result.nll = neg_log_likelihood_with(
        &result.params,
        dataset.responses(),
        design,
        controls.execution,
    )?;
    result.parameter_names = result.params.parameter_names(design);
    if let Some(cov) = result.covariance.take() {
        let m = cov.nrows();
        let mut a = DMatrix::identity(m, m);
        a.view_mut((k, k), (m - k, m - k))
            .copy_from(&standardization.jacobian());
        let mapped = &a * cov * a.transpose();
        result.std_errors = Some((0..m).map(|i| mapped[(i, i)].sqrt()).collect());
        result.covariance = Some(mapped);
    }
    Ok(result)
}
