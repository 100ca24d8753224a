//! Data-parallel map with a sequential fallback.
//!
//! With the `parallel` feature (default) work is spread over the rayon pool;
//! without it the same closures run on the calling thread. Results are
//! always returned in index order, so output never depends on scheduling.

/// `(0..len).map(f).collect()`, possibly in parallel.
#[cfg(feature = "parallel")]
pub fn map_indices<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..len).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indices<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..len).map(f).collect()
}

/// Like [`map_indices`] but stays sequential below `min_len` items, where
/// spawning costs more than the work.
pub fn map_indices_min<T, F>(len: usize, min_len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if len < min_len {
        (0..len).map(f).collect()
    } else {
        map_indices(len, f)
    }
}

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
