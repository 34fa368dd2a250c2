//! Maybe-parallel helpers.
//!
//! With the `parallel` feature, index maps above [`PAR_THRESHOLD`] items are
//! spread over the rayon pool; otherwise they run sequentially. Output order
//! is always index order and no reduction happens here, so callers that fold
//! the returned vectors sequentially get results independent of the thread
//! count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Below this many items the rayon dispatch costs more than it saves.
pub const PAR_THRESHOLD: usize = 1024;

pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if n >= PAR_THRESHOLD {
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    (0..n).map(f).collect()
}

/// Same as [`map_indexed`] but with an explicit threshold; `0` forces the
/// parallel path (when compiled in) and `usize::MAX` forces sequential.
pub fn map_indexed_with<T, F>(n: usize, threshold: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if n >= threshold {
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threshold;
    (0..n).map(f).collect()
}

pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    map_indexed(items.len(), |i| f(&items[i]))
}

/// Whether the rayon path is compiled in.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
