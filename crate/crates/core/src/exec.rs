//! Node-loop execution helpers.
//!
//! With the `parallel` feature the maps below run on the rayon pool; without it
//! they are plain iterator loops. Reductions always happen sequentially over the
//! collected values in index order, so results are bit-identical for any thread
//! count and for both builds.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Evaluates `f(i)` for `i in 0..len`, preserving index order.
pub fn map_indexed<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..len).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(f).collect()
    }
}

/// Maps over a slice, preserving order.
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Deterministic sum of `f(i)` over `0..len`.
pub fn sum_indexed<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    // Small loops are not worth the scheduling overhead.
    if len < 4096 {
        return (0..len).map(f).sum();
    }
    map_indexed(len, f).into_iter().sum()
}

/// Whether node loops are dispatched to rayon.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
