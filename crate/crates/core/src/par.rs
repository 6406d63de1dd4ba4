//! Deterministic parallel map over independent cells.
//!
//! Results are collected in key order, so reductions are worker-count
//! independent as long as each cell's computation is pure (and any
//! randomness is keyed through `rng::stream`).

use rayon::prelude::*;

pub fn parallel_map<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    (0..n).into_par_iter().map(f).collect()
}

/// Map over an explicit key slice, preserving key order.
pub fn parallel_map_keys<K: Sync, T: Send, F: Fn(&K) -> T + Sync + Send>(
    keys: &[K],
    f: F,
) -> Vec<T> {
    keys.par_iter().map(f).collect()
}
