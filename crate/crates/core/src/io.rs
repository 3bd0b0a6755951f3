//! Model configuration, CSV data and JSON fit reports.

use std::fs::File;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::composite::{TailFamily, TailShape};
use crate::diagnostics::{coefficient_tests, selection_report, ResidualSet};
use crate::estimation::{FitControls, FitResult};
use crate::regression::{Covariate, CovariateValues, Dataset, DesignMatrix, ModelParams};
use crate::simulation::CovariateRecipe;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("configuration: {0}")]
    Config(String),
    #[error("data: {0}")]
    Data(String),
    #[error(transparent)]
    Model(#[from] crate::error::Error),
}

pub type IoResult<T> = std::result::Result<T, IoError>;

fn open(path: &Path) -> IoResult<File> {
    File::open(path).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })
}

fn create(path: &Path) -> IoResult<File> {
    File::create(path).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CovariateKind {
    Numeric,
    Categorical {
        /// Explicit level order; the first level is the reference.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        levels: Option<Vec<String>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovariateSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: CovariateKind,
}

/// True model used by `simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub sigma: f64,
    pub alpha: f64,
    #[serde(default)]
    pub delta: Option<f64>,
    /// Coefficients for the design encoded from `generators`, intercept first.
    pub coefficients: Vec<f64>,
    pub generators: Vec<CovariateRecipe>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub family: TailFamily,
    pub response: String,
    #[serde(default)]
    pub covariates: Vec<CovariateSpec>,
    #[serde(default)]
    pub controls: FitControls,
    #[serde(default)]
    pub standardize: bool,
    #[serde(default)]
    pub simulation: Option<SimulationConfig>,
}

impl ModelConfig {
    pub fn from_json(text: &str) -> IoResult<Self> {
        let config: ModelConfig =
            serde_json::from_str(text).map_err(|e| IoError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> IoResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| IoError::File {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> IoResult<()> {
        for (k, c) in self.covariates.iter().enumerate() {
            if c.name == self.response {
                return Err(IoError::Config(format!(
                    "'{}' is both the response and a covariate",
                    c.name
                )));
            }
            if self.covariates[..k].iter().any(|o| o.name == c.name) {
                return Err(IoError::Config(format!(
                    "covariate '{}' listed twice",
                    c.name
                )));
            }
        }
        if let Some(sim) = &self.simulation {
            self.true_params(sim)?;
        }
        Ok(())
    }

    pub fn covariate_names(&self) -> Vec<&str> {
        self.covariates.iter().map(|c| c.name.as_str()).collect()
    }

    /// Parameters of the simulation block.
    pub fn true_params(&self, sim: &SimulationConfig) -> IoResult<ModelParams> {
        let wants_delta = self.family.n_shapes() == 2;
        if wants_delta != sim.delta.is_some() {
            return Err(IoError::Config(format!(
                "the {} tail {} delta",
                self.family,
                if wants_delta { "needs" } else { "takes no" }
            )));
        }
        let params = ModelParams {
            sigma: sim.sigma,
            shape: TailShape::from_parts(self.family, sim.alpha, sim.delta)
                .map_err(|e| IoError::Config(e.to_string()))?,
            gamma: sim.coefficients.clone(),
        };
        params
            .validate()
            .map_err(|e| IoError::Config(e.to_string()))?;
        Ok(params)
    }
}

/// Reads `response` and the configured covariates from a CSV file with a
/// header row. Errors name the 1-based data row and the column.
pub fn read_csv(path: &Path, response: &str, covariates: &[CovariateSpec]) -> IoResult<Dataset> {
    read_csv_from(open(path)?, response, covariates)
}

pub fn read_csv_from<R: std::io::Read>(
    reader: R,
    response: &str,
    covariates: &[CovariateSpec],
) -> IoResult<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| IoError::Data(e.to_string()))?
        .clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| IoError::Data(format!("missing column '{name}'")))
    };
    let y_col = column(response)?;
    let cov_cols = covariates
        .iter()
        .map(|c| column(&c.name))
        .collect::<IoResult<Vec<_>>>()?;

    let mut ys = Vec::new();
    let mut cells: Vec<Vec<String>> = vec![Vec::new(); covariates.len()];
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| IoError::Data(format!("row {row}: {e}")))?;
        let field = |col: usize| record.get(col).unwrap_or("").trim();
        let parse = |col: usize, name: &str| {
            field(col).parse::<f64>().map_err(|_| {
                IoError::Data(format!(
                    "row {row}, column '{name}': cannot parse '{}' as a number",
                    field(col)
                ))
            })
        };
        let y = parse(y_col, response)?;
        if !(y > 0.0) || !y.is_finite() {
            return Err(IoError::Data(format!(
                "row {row}: response must be positive and finite, got {y}"
            )));
        }
        ys.push(y);
        for (k, (spec, &col)) in covariates.iter().zip(&cov_cols).enumerate() {
            if matches!(spec.kind, CovariateKind::Numeric) {
                parse(col, &spec.name)?;
            }
            cells[k].push(field(col).to_string());
        }
    }

    let columns = covariates
        .iter()
        .zip(cells)
        .map(|(spec, cells)| match &spec.kind {
            CovariateKind::Numeric => Ok(Covariate::numeric(
                spec.name.clone(),
                cells
                    .iter()
                    .map(|c| c.parse::<f64>().unwrap_or(f64::NAN))
                    .collect(),
            )),
            CovariateKind::Categorical { levels } => {
                Covariate::categorical_from_labels(spec.name.clone(), levels.clone(), &cells)
                    .map_err(|e| IoError::Data(e.to_string()))
            }
        })
        .collect::<IoResult<Vec<_>>>()?;
    Dataset::new(ys, columns).map_err(|e| IoError::Data(e.to_string()))
}

/// Writes the response and covariates as CSV. Numbers use the shortest
/// representation that round-trips.
pub fn write_csv(path: &Path, response: &str, dataset: &Dataset) -> IoResult<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    write_records(&mut w, response, dataset)?;
    w.flush().map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })
}

fn write_records<W: std::io::Write>(
    w: &mut csv::Writer<W>,
    response: &str,
    dataset: &Dataset,
) -> IoResult<()> {
    let csv_err = |e: csv::Error| IoError::Data(e.to_string());
    let mut header = vec![response.to_string()];
    header.extend(dataset.covariates().iter().map(|c| c.name.clone()));
    w.write_record(&header).map_err(csv_err)?;
    for (i, y) in dataset.responses().iter().enumerate() {
        let mut record = vec![y.to_string()];
        for c in dataset.covariates() {
            record.push(match &c.values {
                CovariateValues::Numeric(v) => v[i].to_string(),
                CovariateValues::Categorical { levels, codes } => levels[codes[i]].clone(),
            });
        }
        w.write_record(&record).map_err(csv_err)?;
    }
    Ok(())
}

/// `row,y,cdf,k` with 1-based rows.
pub fn write_residuals(path: &Path, responses: &[f64], residuals: &ResidualSet) -> IoResult<()> {
    let csv_err = |e: csv::Error| IoError::Data(e.to_string());
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["row", "y", "cdf", "k"]).map_err(csv_err)?;
    for (i, ((y, f), k)) in responses
        .iter()
        .zip(&residuals.cdf)
        .zip(&residuals.k)
        .enumerate()
    {
        w.write_record([
            (i + 1).to_string(),
            y.to_string(),
            f.to_string(),
            k.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })
}

/// `theoretical,empirical` QQ pairs.
pub fn write_qq(path: &Path, residuals: &ResidualSet) -> IoResult<()> {
    let csv_err = |e: csv::Error| IoError::Data(e.to_string());
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["theoretical", "empirical"])
        .map_err(csv_err)?;
    for (t, e) in &residuals.qq_pairs {
        w.write_record([t.to_string(), e.to_string()])
            .map_err(csv_err)?;
    }
    w.flush().map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })
}

/// JSON numbers with 17 significant digits; non-finite values become null.
mod precise {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use serde_json::value::RawValue;

    fn raw(x: f64) -> Option<Box<RawValue>> {
        x.is_finite()
            .then(|| RawValue::from_string(format!("{x:.16e}")).expect("valid JSON number"))
    }

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        raw(*x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
            x.and_then(raw).serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
            Option::<f64>::deserialize(d)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterReport {
    #[serde(with = "precise")]
    pub estimate: f64,
    #[serde(with = "precise::option")]
    pub std_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientReport {
    pub name: String,
    #[serde(with = "precise")]
    pub estimate: f64,
    #[serde(with = "precise::option")]
    pub std_error: Option<f64>,
    #[serde(with = "precise::option")]
    pub t_ratio: Option<f64>,
    #[serde(with = "precise::option")]
    pub p_value: Option<f64>,
}

/// Contents of `fit.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub family: TailFamily,
    pub response: String,
    /// Covariates with the level order used for coding.
    pub covariates: Vec<CovariateSpec>,
    pub standardized: bool,
    pub coefficients: Vec<CoefficientReport>,
    pub sigma: ParameterReport,
    pub alpha: ParameterReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<ParameterReport>,
    #[serde(with = "precise")]
    pub nll: f64,
    #[serde(with = "precise")]
    pub aic: f64,
    #[serde(with = "precise")]
    pub bic: f64,
    pub df: usize,
    pub n: usize,
    pub converged: bool,
    pub iterations: usize,
    #[serde(with = "precise")]
    pub gradient_norm: f64,
    pub starts: usize,
    pub distinct_optima: usize,
}

/// Two-sided level used for the significance flag of coefficient tests.
pub const TEST_LEVEL: f64 = 0.05;

/// Covariate specs with levels resolved from the data.
pub fn resolved_covariates(dataset: &Dataset, names: &[&str]) -> Vec<CovariateSpec> {
    names
        .iter()
        .filter_map(|name| dataset.covariate(name))
        .map(|c| CovariateSpec {
            name: c.name.clone(),
            kind: match &c.values {
                CovariateValues::Numeric(_) => CovariateKind::Numeric,
                CovariateValues::Categorical { levels, .. } => CovariateKind::Categorical {
                    levels: Some(levels.clone()),
                },
            },
        })
        .collect()
}

impl FitReport {
    pub fn new(
        config: &ModelConfig,
        dataset: &Dataset,
        design: &DesignMatrix,
        fit: &FitResult,
    ) -> IoResult<Self> {
        let se = |j: usize| fit.std_errors.as_ref().map(|s| s[j]);
        let tests = fit
            .std_errors
            .as_ref()
            .map(|_| coefficient_tests(fit, design, TEST_LEVEL))
            .transpose()?;
        let offset = 1 + config.family.n_shapes();
        let coefficients = design
            .column_names()
            .iter()
            .enumerate()
            .map(|(j, name)| CoefficientReport {
                name: name.clone(),
                estimate: fit.params.gamma[j],
                std_error: se(offset + j),
                t_ratio: tests.as_ref().map(|t| t[j].t_ratio),
                p_value: tests.as_ref().map(|t| t[j].p_value),
            })
            .collect();
        let selection = selection_report(fit.nll, fit.df(), fit.n);
        Ok(FitReport {
            family: config.family,
            response: config.response.clone(),
            covariates: resolved_covariates(dataset, &config.covariate_names()),
            standardized: config.standardize,
            coefficients,
            sigma: ParameterReport {
                estimate: fit.params.sigma,
                std_error: se(0),
            },
            alpha: ParameterReport {
                estimate: fit.params.shape.alpha(),
                std_error: se(1),
            },
            delta: fit.params.shape.delta().map(|d| ParameterReport {
                estimate: d,
                std_error: se(2),
            }),
            nll: selection.nll,
            aic: selection.aic,
            bic: selection.bic,
            df: selection.df,
            n: selection.n,
            converged: fit.converged,
            iterations: fit.iterations,
            gradient_norm: fit.gradient_norm,
            starts: fit.starts,
            distinct_optima: fit.distinct_optima,
        })
    }

    pub fn params(&self) -> IoResult<ModelParams> {
        let params = ModelParams {
            sigma: self.sigma.estimate,
            shape: TailShape::from_parts(
                self.family,
                self.alpha.estimate,
                self.delta.as_ref().map(|d| d.estimate),
            )?,
            gamma: self.coefficients.iter().map(|c| c.estimate).collect(),
        };
        params.validate()?;
        Ok(params)
    }

    /// Standard errors in `(σ, α[, δ], γ…)` order, if all are present.
    pub fn std_errors(&self) -> Option<Vec<f64>> {
        let mut v = vec![self.sigma.std_error?, self.alpha.std_error?];
        if let Some(d) = &self.delta {
            v.push(d.std_error?);
        }
        for c in &self.coefficients {
            v.push(c.std_error?);
        }
        Some(v)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> IoResult<Self> {
        serde_json::from_str(text).map_err(|e| IoError::Config(format!("fit report: {e}")))
    }

    pub fn save(&self, path: &Path) -> IoResult<()> {
        std::fs::write(path, self.to_json()).map_err(|source| IoError::File {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> IoResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| IoError::File {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }
}
