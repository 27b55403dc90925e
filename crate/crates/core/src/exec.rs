//! Order-preserving batch helpers. With the `parallel` feature the work is
//! spread over the ambient rayon pool; outputs keep input order either way.

use alloc::vec::Vec;

#[cfg(feature = "parallel")]
pub(crate) fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

/// Maps fixed-size chunks of `items`. Chunk boundaries do not depend on the
/// thread count, so reductions over the returned vector are reproducible.
#[cfg(feature = "parallel")]
pub(crate) fn map_chunks<T, R, F>(items: &[T], chunk: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&[T]) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.par_chunks(chunk.max(1)).map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_chunks<T, R, F>(items: &[T], chunk: usize, f: F) -> Vec<R>
where
    F: Fn(&[T]) -> R,
{
    items.chunks(chunk.max(1)).map(f).collect()
}
