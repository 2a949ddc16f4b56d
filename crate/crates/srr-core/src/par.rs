//! Batch execution of independent work items.
//!
//! Coverage checks, parameter sweeps, and bound reports all evaluate
//! many independent instances; they funnel through [`map_batch`],
//! which runs on a rayon thread pool when the `parallel` feature
//! (default) is enabled and sequentially otherwise. Results preserve
//! input order either way, so outputs are identical across modes.
//! [`map_batch_seq`] is always sequential, as a baseline for
//! benchmarks and for callers that want to pin execution.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Applies `f` to every item, preserving order. Runs data-parallel
/// under the `parallel` feature, sequentially otherwise.
pub fn map_batch<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Send + Sync,
{
    #[cfg(feature = "parallel")]
    {
        items.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.into_iter().map(f).collect()
    }
}

/// Applies `f` to every item sequentially, regardless of features.
pub fn map_batch_seq<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}
