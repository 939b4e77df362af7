//! Replica-level parallelism. Results always come back in replica order and
//! every replica owns its random stream, so output does not depend on the
//! thread count.

use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::CliError;

pub const THREADS_ENV: &str = "MACROKIN_THREADS";

static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();

/// Thread cap from `MACROKIN_THREADS`, else the machine's parallelism.
pub fn thread_count() -> Result<usize, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(CliError::config(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn pool() -> &'static rayon::ThreadPool {
    POOL.get_or_init(|| {
        let n = thread_count().unwrap_or(1);
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
    })
}

/// `f(0), ..., f(n - 1)` in order.
pub fn par_map<T, F>(n: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    pool().install(|| (0..n).into_par_iter().map(f).collect())
}

/// Like [`par_map`] for fallible work; the first error in replica order wins.
pub fn try_par_map<T, E, F>(n: u64, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(u64) -> Result<T, E> + Sync + Send,
{
    par_map(n, f).into_iter().collect()
}
