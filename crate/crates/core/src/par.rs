//! Ordered data-parallel maps with a sequential fallback.
//!
//! Parallelism is only ever used for element-wise maps that collect into a
//! `Vec` in index order. Every reduction is done afterwards by a sequential
//! fold over that vector, so results are bit-identical with or without the
//! `parallel` feature and for any thread count.

use std::sync::atomic::{AtomicBool, Ordering};

static FORCE_SEQUENTIAL: AtomicBool = AtomicBool::new(false);

/// Below this many items the sequential path is taken regardless.
pub const PAR_THRESHOLD: usize = 256;

/// Runtime switch used by benchmarks to compare both code paths in one binary.
pub fn set_force_sequential(on: bool) {
    FORCE_SEQUENTIAL.store(on, Ordering::Relaxed);
}

pub fn force_sequential() -> bool {
    FORCE_SEQUENTIAL.load(Ordering::Relaxed)
}

pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel") && !force_sequential()
}

/// `(0..n).map(f).collect()`, possibly evaluated in parallel.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if n >= PAR_THRESHOLD && !force_sequential() {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    (0..n).map(f).collect()
}

/// Same as [`map_indexed`] but ignores the size threshold; used for coarse
/// grained work items such as matrix columns.
pub fn map_coarse<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if n > 1 && !force_sequential() {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    (0..n).map(f).collect()
}

/// Sequential left-to-right sum, the single summation order used everywhere.
pub fn sum_f64(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0, |a, &x| a + x)
}
