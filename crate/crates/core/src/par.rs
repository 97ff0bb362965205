//! Index-parallel map with a sequential fallback.
//!
//! With the `parallel` feature enabled the work is spread over the rayon
//! pool; without it the same closure runs in a plain loop. Output order is
//! always index order, so results never depend on the schedule.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Evaluates `f(i)` for `i in 0..len` and collects the results in index order.
pub fn map_indices<T, F>(len: usize, f: F) -> Vec<T>
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

/// Same as [`map_indices`] but always sequential.
pub fn map_indices_seq<T, F>(len: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..len).map(f).collect()
}

/// Configures the global pool size. A no-op without the `parallel` feature.
///
/// Returns false if the pool had already been initialised.
pub fn set_threads(threads: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        true
    }
}

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
