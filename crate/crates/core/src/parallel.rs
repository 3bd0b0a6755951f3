//! Row-parallel helpers with a sequential fallback.
//!
//! Reductions use a fixed chunking: rows are summed left to right inside
//! chunks of [`CHUNK_ROWS`], and the chunk totals are combined pairwise. The
//! grouping does not depend on the thread count, so sequential and parallel
//! runs produce bit-identical sums.

use crate::error::Result;

pub const CHUNK_ROWS: usize = 512;

/// How row-wise work is scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Uses rayon when the `parallel` feature is enabled; otherwise runs
    /// sequentially.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

fn pairwise(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => {
            let (left, right) = values.split_at(n / 2);
            pairwise(left) + pairwise(right)
        }
    }
}

fn chunk_sum<F>(start: usize, end: usize, term: &F) -> Result<f64>
where
    F: Fn(usize) -> Result<f64>,
{
    let mut acc = 0.0;
    for i in start..end {
        acc += term(i)?;
    }
    Ok(acc)
}

/// Deterministic sum of `term(i)` for `i in 0..n`. On failure the error of
/// the lowest failing chunk is returned.
pub fn chunked_sum<F>(n: usize, execution: Execution, term: F) -> Result<f64>
where
    F: Fn(usize) -> Result<f64> + Sync,
{
    let n_chunks = n.div_ceil(CHUNK_ROWS);
    let bounds = |c: usize| (c * CHUNK_ROWS, ((c + 1) * CHUNK_ROWS).min(n));

    let partials: Vec<Result<f64>> = match execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n_chunks)
                .into_par_iter()
                .map(|c| {
                    let (s, e) = bounds(c);
                    chunk_sum(s, e, &term)
                })
                .collect()
        }
        _ => (0..n_chunks)
            .map(|c| {
                let (s, e) = bounds(c);
                chunk_sum(s, e, &term)
            })
            .collect(),
    };
    let sums = partials.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(pairwise(&sums))
}

/// Ordered map over `0..n`.
pub fn map_rows<T, F>(n: usize, execution: Execution, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    match execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

/// Ordered map over a slice of independent jobs.
pub fn map_jobs<J, T, F>(jobs: &[J], execution: Execution, f: F) -> Vec<T>
where
    J: Sync,
    T: Send,
    F: Fn(usize, &J) -> T + Sync,
{
    match execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            jobs.par_iter().enumerate().map(|(i, j)| f(i, j)).collect()
        }
        _ => jobs.iter().enumerate().map(|(i, j)| f(i, j)).collect(),
    }
}
