//! Execution shims: data-parallel when the `parallel` feature is enabled,
//! plain sequential loops otherwise. All reductions used through here are
//! associative and exact, so both paths produce identical results.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Fold `0..n` into an accumulator and merge partial accumulators.
#[cfg(feature = "parallel")]
pub fn fold_range<T, I, F, M>(n: u64, init: I, fold: F, merge: M) -> T
where
    T: Send,
    I: Fn() -> T + Sync + Send,
    F: Fn(T, u64) -> T + Sync + Send,
    M: Fn(T, T) -> T + Sync + Send,
{
    (0..n)
        .into_par_iter()
        .fold(&init, &fold)
        .reduce(&init, &merge)
}

/// Fold `0..n` into an accumulator and merge partial accumulators.
#[cfg(not(feature = "parallel"))]
pub fn fold_range<T, I, F, M>(n: u64, init: I, fold: F, merge: M) -> T
where
    T: Send,
    I: Fn() -> T + Sync + Send,
    F: Fn(T, u64) -> T + Sync + Send,
    M: Fn(T, T) -> T + Sync + Send,
{
    let _ = &merge;
    (0..n).fold(init(), fold)
}

/// Map a slice, preserving input order in the output.
#[cfg(feature = "parallel")]
pub fn map_slice<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.par_iter().map(f).collect()
}

/// Map a slice, preserving input order in the output.
#[cfg(not(feature = "parallel"))]
pub fn map_slice<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.iter().map(f).collect()
}

/// Map `0..n`, preserving index order in the output.
pub fn map_range<U, F>(n: u64, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(u64) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}
