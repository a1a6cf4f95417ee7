//! Thin shim over rayon so every bulk loop has a sequential twin.
//!
//! With the `parallel` feature (default) these dispatch to rayon; without
//! it they are plain iterator loops. Callers must not rely on execution
//! order: results are always collected in input order, and any
//! floating-point reduction is performed by the caller over the ordered
//! output so that numbers are identical for every thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `0..n`, collecting results in index order.
pub(crate) fn map_indexed<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
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

/// Map `f` over a slice, collecting results in input order.
pub(crate) fn map_slice<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
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

/// Chunked map-then-ordered-fold: process `0..n` in fixed chunks of
/// `chunk` items, mapping each index with `f` and folding the results
/// into `acc` strictly in index order. Bounds peak memory at one chunk
/// of partial results while keeping the fold order fixed.
pub(crate) fn chunked_fold<R, F, G, A>(n: usize, chunk: usize, mut acc: A, f: F, mut fold: G) -> A
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
    G: FnMut(&mut A, R),
{
    let chunk = chunk.max(1);
    let mut start = 0;
    while start < n {
        let end = (start + chunk).min(n);
        let partials = {
            #[cfg(feature = "parallel")]
            {
                (start..end).into_par_iter().map(&f).collect::<Vec<R>>()
            }
            #[cfg(not(feature = "parallel"))]
            {
                (start..end).map(&f).collect::<Vec<R>>()
            }
        };
        for p in partials {
            fold(&mut acc, p);
        }
        start = end;
    }
    acc
}
