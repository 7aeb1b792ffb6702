//! Order-preserving map over independent work items.
//!
//! With the `parallel` feature the items run on a rayon pool; without it
//! they run one after another. Either way the output is in input order.

use crate::error::{Error, Result};

/// Number of workers used when the caller does not ask for one.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Applies `f` to every item, using at most `workers` threads.
#[cfg(feature = "parallel")]
pub fn par_map<T, R, F>(items: &[T], workers: usize, f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;

    if workers == 0 {
        return Err(Error::invalid("workers", "must be at least 1"));
    }
    if workers == 1 {
        return Ok(items.iter().map(f).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Numerical(format!("could not start worker pool: {e}")))?;
    Ok(pool.install(|| items.par_iter().map(&f).collect()))
}

#[cfg(not(feature = "parallel"))]
pub fn par_map<T, R, F>(items: &[T], workers: usize, f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    if workers == 0 {
        return Err(Error::invalid("workers", "must be at least 1"));
    }
    Ok(items.iter().map(f).collect())
}

/// Always sequential; the baseline for benchmarks.
pub fn seq_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}
