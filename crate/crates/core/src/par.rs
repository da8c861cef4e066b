//! Serial or thread-pool execution of independent work items.

use crate::{Error, Result};

/// Environment variable holding the worker-thread cap. Unset or `0` runs serially.
pub const THREADS_ENV: &str = "MESOJJ_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Sequential,
    Parallel {
        threads: usize,
    },
}

impl Execution {
    pub fn from_threads(threads: usize) -> Self {
        match threads {
            0 | 1 => Execution::Sequential,
            threads => Execution::Parallel { threads },
        }
    }

    pub fn from_env() -> Result<Self> {
        match std::env::var(THREADS_ENV) {
            Err(std::env::VarError::NotPresent) => Ok(Execution::Sequential),
            Err(e) => Err(Error::Config(format!("{THREADS_ENV}: {e}"))),
            Ok(s) if s.trim().is_empty() => Ok(Execution::Sequential),
            Ok(s) => s
                .trim()
                .parse::<usize>()
                .map(Execution::from_threads)
                .map_err(|_| {
                    Error::Config(format!(
                        "{THREADS_ENV} must be a non-negative integer, got {s:?}"
                    ))
                }),
        }
    }

    pub fn threads(&self) -> usize {
        match *self {
            Execution::Sequential => 1,
            Execution::Parallel { threads } => threads,
        }
    }

    /// Applies `f` to every item; output order matches input order.
    ///
    /// Without the `parallel` feature every mode runs serially.
    pub fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match *self {
            Execution::Sequential => items.iter().map(f).collect(),
            Execution::Parallel { threads } => parallel_map(threads, items, f),
        }
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<T, R, F>(threads: usize, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
        Err(_) => items.iter().map(f).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T, R, F>(_threads: usize, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.iter().map(f).collect()
}
