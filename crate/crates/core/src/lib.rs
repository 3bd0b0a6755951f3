//! Composite Lognormal-T severity regression.
//!
//! A lognormal head is spliced to a heavy tail (Burr, Stoppa or GlogM) at the
//! tail's mode. The tail scale depends on covariates through a log link, so
//! every observation carries its own threshold. The crate fits these models
//! by maximum likelihood and provides selection statistics, quantile
//! residuals and an exact sampler.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod composite;
pub mod diagnostics;
pub mod distributions;
pub mod error;
pub mod estimation;
pub mod io;
pub mod parallel;
pub mod regression;
pub mod simulation;
pub mod special;

pub use composite::{Composite, CompositeSpec, TailFamily, TailShape};
pub use error::{Error, Result};
pub use estimation::{fit, FitControls, FitResult};
pub use parallel::Execution;
pub use regression::{encode, Covariate, Dataset, DesignMatrix, ModelParams};
