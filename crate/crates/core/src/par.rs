//! Dispatch helpers for the `parallel` feature.
//!
//! Work is always split along independent output slices, so the per-element
//! accumulation order never changes and parallel and sequential runs produce
//! bit-identical results.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Below this many output elements the rayon dispatch overhead dominates.
const PAR_MIN_ELEMS: usize = 1 << 12;

/// Apply `f` to each `chunk`-sized slice of `data` with its chunk index.
pub(crate) fn for_each_chunk<F>(data: &mut [f32], chunk: usize, f: F)
where
    F: Fn(usize, &mut [f32]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if data.len() >= PAR_MIN_ELEMS {
            data.par_chunks_mut(chunk)
                .enumerate()
                .for_each(|(i, c)| f(i, c));
            return;
        }
    }
    data.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
}

/// Map `f` over `0..n`, preserving input order in the output.
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        return (0..n).into_par_iter().map(f).collect();
    }
    #[cfg(not(feature = "parallel"))]
    (0..n).map(f).collect()
}
