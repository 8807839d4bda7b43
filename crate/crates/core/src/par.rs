//! Data-parallel map with a sequential fallback.
//!
//! All parallel work in this crate flows through this one function:
//! independent tasks in, results in input order out. With the `parallel`
//! feature (default) the map runs on the rayon pool; without it the same
//! code path degrades to a plain iterator, which keeps the two builds
//! byte-for-byte comparable.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[cfg(feature = "parallel")]
pub fn try_map_collect<T, U, E, F>(items: Vec<T>, f: F) -> Result<Vec<U>, E>
where
    T: Send,
    U: Send,
    E: Send,
    F: Fn(T) -> Result<U, E> + Sync + Send,
{
    items.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn try_map_collect<T, U, E, F>(items: Vec<T>, f: F) -> Result<Vec<U>, E>
where
    F: Fn(T) -> Result<U, E>,
{
    items.into_iter().map(f).collect()
}

/// Always-sequential variant, kept available under every feature set so
/// benchmarks can compare the two execution modes directly.
pub fn try_map_collect_sequential<T, U, E, F>(items: Vec<T>, f: F) -> Result<Vec<U>, E>
where
    F: Fn(T) -> Result<U, E>,
{
    items.into_iter().map(f).collect()
}
