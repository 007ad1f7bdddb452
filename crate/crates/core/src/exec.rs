//! Sequential/parallel dispatch for the dense kernels.
//!
//! With the `parallel` feature enabled, table fills and focal-pair sweeps run
//! on rayon once they cross a size threshold. Results are bit-identical to the
//! sequential path: fills are order-preserving maps, and pair sweeps always
//! accumulate in fixed-size chunks merged in index order, so floating-point
//! addition order never depends on thread scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Below this many output cells (or focal pairs) the sequential path is used
/// even when `parallel` is enabled; rayon overhead dominates tiny tables.
pub const PARALLEL_THRESHOLD: usize = 1 << 12;

/// Chunk size for focal-pair sweeps. Fixed so that chunked accumulation has
/// the same grouping in both execution paths.
pub(crate) const PAIR_CHUNK: usize = 1 << 10;

/// Force one execution path; `Auto` picks by size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    #[default]
    Auto,
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl ExecMode {
    #[inline]
    pub(crate) fn parallel_for(self, len: usize) -> bool {
        match self {
            ExecMode::Auto => cfg!(feature = "parallel") && len >= PARALLEL_THRESHOLD,
            ExecMode::Sequential => false,
            #[cfg(feature = "parallel")]
            ExecMode::Parallel => true,
        }
    }
}

/// Order-preserving `(0..len).map(f)`.
pub(crate) fn fill<F>(len: usize, mode: ExecMode, f: F) -> Vec<f64>
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.parallel_for(len) {
        return (0..len).into_par_iter().map(f).collect();
    }
    let _ = mode;
    (0..len).map(f).collect()
}

/// Maps every chunk of `0..len` (fixed `PAIR_CHUNK` ranges) through `f` and
/// merges the partial results in chunk order.
pub(crate) fn chunked_sweep<T, F, M>(len: usize, mode: ExecMode, f: F, mut merge: M, init: T) -> T
where
    T: Send,
    F: Fn(std::ops::Range<usize>) -> T + Sync + Send,
    M: FnMut(T, T) -> T,
{
    let ranges: Vec<std::ops::Range<usize>> = (0..len)
        .step_by(PAIR_CHUNK.max(1))
        .map(|start| start..(start + PAIR_CHUNK).min(len))
        .collect();
    #[cfg(feature = "parallel")]
    if mode.parallel_for(len) {
        let parts: Vec<T> = ranges.into_par_iter().map(f).collect();
        return parts.into_iter().fold(init, merge);
    }
    let _ = mode;
    ranges.into_iter().map(f).fold(init, &mut merge)
}
