//! Command-line surface: `fit`, `simulate` and `diagnose`.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 fit did not converge (reports are still written).

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::diagnostics::{quantile_residuals, selection_report, t_ratio_test};
use crate::estimation::{fit, fit_standardized};
use crate::io::{
    read_csv, write_csv, write_qq, write_residuals, FitReport, IoError, IoResult, ModelConfig,
};
use crate::regression::{encode, neg_log_likelihood_with};
use crate::simulation::{sample, SimulationPlan};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "severity",
    version,
    about = "Composite Lognormal-T severity regression"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model and write fit.json, residuals.csv and qq.csv.
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw a synthetic dataset from the config's simulation block.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recompute selection statistics, tests and residuals from a saved fit.
    Diagnose {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        fit: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn exit_code(err: &IoError) -> i32 {
    match err {
        IoError::Config(_) => EXIT_USAGE,
        IoError::File { .. } | IoError::Data(_) | IoError::Model(_) => EXIT_DATA,
    }
}

fn make_dir(path: &Path) -> IoResult<()> {
    std::fs::create_dir_all(path).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })
}

/// Caps the rayon pool at `SEVERITY_THREADS` when set.
fn configure_threads() {
    #[cfg(feature = "parallel")]
    if let Some(n) = std::env::var("SEVERITY_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        // a pool may already exist when called twice in one process
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

fn run_fit(data: &Path, config: &Path, out: &Path) -> IoResult<i32> {
    let config = ModelConfig::load(config)?;
    let dataset = read_csv(data, &config.response, &config.covariates)?;
    let design = encode(&dataset, &config.covariate_names())?;
    let result = if config.standardize {
        fit_standardized(&dataset, &design, config.family, &config.controls)?
    } else {
        fit(&dataset, &design, config.family, None, &config.controls)?
    };
    make_dir(out)?;
    let report = FitReport::new(&config, &dataset, &design, &result)?;
    report.save(&out.join("fit.json"))?;
    let residuals = quantile_residuals(&result.params, &dataset, &design)?;
    write_residuals(&out.join("residuals.csv"), dataset.responses(), &residuals)?;
    write_qq(&out.join("qq.csv"), &residuals)?;
    if residuals.excluded > 0 {
        eprintln!(
            "{} residuals at the edge of the support were left out of qq.csv",
            residuals.excluded
        );
    }
    if result.converged {
        Ok(EXIT_OK)
    } else {
        eprintln!(
            "optimizer stopped without converging ({:?} after {} iterations)",
            result.termination, result.iterations
        );
        Ok(EXIT_NOT_CONVERGED)
    }
}

fn run_simulate(config: &Path, n: usize, seed: u64, out: &Path) -> IoResult<i32> {
    let config = ModelConfig::load(config)?;
    let sim = config
        .simulation
        .as_ref()
        .ok_or_else(|| IoError::Config("no simulation block in the configuration".into()))?;
    if n == 0 {
        return Err(IoError::Config("--n must be at least 1".into()));
    }
    let plan = SimulationPlan {
        params: config.true_params(sim)?,
        covariates: sim.generators.clone(),
        n,
        seed,
    };
    let (dataset, _) = sample(&plan).map_err(|e| match e {
        crate::Error::Dimension { .. } => IoError::Config(format!("simulation coefficients: {e}")),
        e => IoError::Model(e),
    })?;
    write_csv(out, &config.response, &dataset)?;
    Ok(EXIT_OK)
}

fn run_diagnose(data: &Path, fit_path: &Path, out: &Path) -> IoResult<i32> {
    let saved = FitReport::load(fit_path)?;
    let dataset = read_csv(data, &saved.response, &saved.covariates)?;
    let names: Vec<&str> = saved.covariates.iter().map(|c| c.name.as_str()).collect();
    let design = encode(&dataset, &names)?;
    let params = saved.params()?;
    let nll = neg_log_likelihood_with(&params, dataset.responses(), &design, Default::default())?;
    let selection = selection_report(nll, params.n_free(), dataset.n());
    let dof = dataset.n().saturating_sub(design.n_cols()) as f64;

    let mut report = saved.clone();
    for c in &mut report.coefficients {
        if let Some(se) = c.std_error {
            let (t, p) = t_ratio_test(c.estimate, se, dof)?;
            c.t_ratio = Some(t);
            c.p_value = Some(p);
        }
    }
    report.nll = selection.nll;
    report.aic = selection.aic;
    report.bic = selection.bic;
    report.df = selection.df;
    report.n = selection.n;

    make_dir(out)?;
    report.save(&out.join("diagnostics.json"))?;
    let residuals = quantile_residuals(&params, &dataset, &design)?;
    write_residuals(&out.join("residuals.csv"), dataset.responses(), &residuals)?;
    write_qq(&out.join("qq.csv"), &residuals)?;
    Ok(EXIT_OK)
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    configure_threads();
    let outcome = match &cli.command {
        Command::Fit { data, config, out } => run_fit(data, config, out),
        Command::Simulate {
            config,
            n,
            seed,
            out,
        } => run_simulate(config, *n, *seed, out),
        Command::Diagnose { data, fit, out } => run_diagnose(data, fit, out),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
