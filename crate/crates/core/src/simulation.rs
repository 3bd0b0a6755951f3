//! Exact sampling from composite regression models by inverse transform.
//!
//! Every row draws from its own ChaCha8 stream keyed by the row index, so the
//! output does not depend on scheduling or on how many rows are generated in
//! parallel.

use rand::distr::{Distribution, Open01};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel::{map_rows, Execution};
use crate::regression::{composites, encode, Covariate, Dataset, DesignMatrix, ModelParams};

/// Generator for one synthetic covariate column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CovariateGenerator {
    Categorical {
        levels: Vec<String>,
        probabilities: Vec<f64>,
    },
    Uniform {
        low: f64,
        high: f64,
    },
    /// Integers in `low..=high` with equal probability.
    IntegerUniform {
        low: i64,
        high: i64,
    },
    LogNormal {
        mu: f64,
        sigma: f64,
    },
}

impl CovariateGenerator {
    pub fn validate(&self) -> Result<()> {
        match self {
            CovariateGenerator::Categorical {
                levels,
                probabilities,
            } => {
                if levels.is_empty() || levels.len() != probabilities.len() {
                    return Err(Error::Data(
                        "categorical generator needs one probability per level".into(),
                    ));
                }
                if probabilities.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
                    return Err(Error::Data(
                        "level probabilities must be nonnegative".into(),
                    ));
                }
                let total: f64 = probabilities.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::Data(format!(
                        "level probabilities sum to {total}, not 1"
                    )));
                }
            }
            CovariateGenerator::Uniform { low, high } => {
                if !(low < high) || !low.is_finite() || !high.is_finite() {
                    return Err(Error::Data(format!(
                        "invalid uniform range [{low}, {high}]"
                    )));
                }
            }
            CovariateGenerator::IntegerUniform { low, high } => {
                if low > high {
                    return Err(Error::Data(format!("invalid integer range {low}..={high}")));
                }
            }
            CovariateGenerator::LogNormal { mu, sigma } => {
                if !mu.is_finite() || !(*sigma > 0.0) || !sigma.is_finite() {
                    return Err(Error::Data(format!("invalid lognormal ({mu}, {sigma})")));
                }
            }
        }
        Ok(())
    }

    fn draw_numeric(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            CovariateGenerator::Uniform { low, high } => low + (high - low) * rng.random::<f64>(),
            CovariateGenerator::IntegerUniform { low, high } => rng.random_range(low..=high) as f64,
            CovariateGenerator::LogNormal { mu, sigma } => {
                let u: f64 = Open01.sample(rng);
                let z = crate::special::std_normal_quantile(u).unwrap_or(0.0);
                (mu + sigma * z).exp()
            }
            CovariateGenerator::Categorical { .. } => unreachable!("categorical draws use codes"),
        }
    }

    fn draw_code(probabilities: &[f64], rng: &mut ChaCha8Rng) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (k, p) in probabilities.iter().enumerate() {
            acc += p;
            if u < acc {
                return k;
            }
        }
        // rounding left a sliver above the last cumulative value
        probabilities.iter().rposition(|p| *p > 0.0).unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovariateRecipe {
    pub name: String,
    #[serde(flatten)]
    pub generator: CovariateGenerator,
}

/// Everything needed to generate a synthetic dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationPlan {
    pub params: ModelParams,
    pub covariates: Vec<CovariateRecipe>,
    pub n: usize,
    pub seed: u64,
}

fn row_rng(seed: u64, stream: u64, row: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    rng.set_stream(row as u64);
    rng
}

/// Covariate columns for `n` rows.
pub fn sample_covariates(
    recipes: &[CovariateRecipe],
    n: usize,
    seed: u64,
    execution: Execution,
) -> Result<Vec<Covariate>> {
    recipes
        .iter()
        .enumerate()
        .map(|(j, recipe)| {
            recipe.generator.validate()?;
            let stream = j as u64 + 1;
            Ok(match &recipe.generator {
                CovariateGenerator::Categorical {
                    levels,
                    probabilities,
                } => {
                    let codes = map_rows(n, execution, |i| {
                        Ok(CovariateGenerator::draw_code(
                            probabilities,
                            &mut row_rng(seed, stream, i),
                        ))
                    })?;
                    Covariate::categorical(recipe.name.clone(), levels.clone(), codes)
                }
                generator => {
                    let values = map_rows(n, execution, |i| {
                        Ok(generator.draw_numeric(&mut row_rng(seed, stream, i)))
                    })?;
                    Covariate::numeric(recipe.name.clone(), values)
                }
            })
        })
        .collect()
}

/// Responses `y_i = Q_i(u_i)` for the per-row composite quantile `Q_i`.
pub fn sample_responses(
    params: &ModelParams,
    design: &DesignMatrix,
    seed: u64,
    execution: Execution,
) -> Result<Vec<f64>> {
    let models = composites(params, design, execution)?;
    map_rows(models.len(), execution, |i| {
        let u: f64 = Open01.sample(&mut row_rng(seed, 0, i));
        models[i].quantile(u).map_err(|e| e.at_row(i + 1))
    })
}

/// Generates covariates, encodes them, and draws responses.
pub fn sample(plan: &SimulationPlan) -> Result<(Dataset, DesignMatrix)> {
    sample_with(plan, Execution::default())
}

pub fn sample_with(plan: &SimulationPlan, execution: Execution) -> Result<(Dataset, DesignMatrix)> {
    if plan.n == 0 {
        return Err(Error::Data("simulation needs at least one row".into()));
    }
    let covariates = sample_covariates(&plan.covariates, plan.n, plan.seed, execution)?;
    let names: Vec<&str> = plan.covariates.iter().map(|c| c.name.as_str()).collect();
    let placeholder = Dataset::new(vec![1.0; plan.n], covariates)?;
    let design = encode(&placeholder, &names)?;
    let responses = sample_responses(&plan.params, &design, plan.seed, execution)?;
    Ok((placeholder.with_responses(responses)?, design))
}

/// Covariate recipe shaped like a motor third-party liability portfolio:
/// engine capacity class (4 levels), policy type (3 levels), vehicle age in
/// whole years 0 to 38, and a right-skewed positive cost.
pub fn mtpl_portfolio() -> Vec<CovariateRecipe> {
    let total = 7263.0;
    let labels = |names: &[&str]| names.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    vec![
        CovariateRecipe {
            name: "cc".into(),
            generator: CovariateGenerator::Categorical {
                levels: labels(&["1", "2", "3", "4"]),
                probabilities: [2036.0, 2417.0, 1833.0, 977.0]
                    .iter()
                    .map(|c| c / total)
                    .collect(),
            },
        },
        CovariateRecipe {
            name: "policy_type".into(),
            generator: CovariateGenerator::Categorical {
                levels: labels(&["Basic", "Middle", "Full"]),
                probabilities: [1144.0, 1940.0, 4179.0].iter().map(|c| c / total).collect(),
            },
        },
        CovariateRecipe {
            name: "vehicle_age".into(),
            generator: CovariateGenerator::IntegerUniform { low: 0, high: 38 },
        },
        CovariateRecipe {
            name: "mtpl_cost".into(),
            generator: CovariateGenerator::LogNormal {
                mu: 4.67f64.ln(),
                sigma: 1.4,
            },
        },
    ]
}
