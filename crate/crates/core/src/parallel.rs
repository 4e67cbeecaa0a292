//! Execution strategy for data-parallel loops.
//!
//! Work is split into indexed tasks whose results are combined with an
//! associative, commutative reduction, so the outcome never depends on how
//! tasks are scheduled. Without the `parallel` feature every strategy runs
//! sequentially.

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "HERALDSIM_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Rayon worker pool; `None` uses the global pool.
    Parallel { threads: Option<usize> },
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel { threads: None }
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// Honors `HERALDSIM_THREADS` when set to a positive integer.
    pub fn from_env() -> Self {
        match std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
            Some(1) => Execution::Sequential,
            Some(n) if n > 1 => Execution::Parallel { threads: Some(n) },
            _ => Execution::default(),
        }
    }

    pub fn is_parallel(&self) -> bool {
        cfg!(feature = "parallel") && matches!(self, Execution::Parallel { .. })
    }

    /// Maps every task index in `0..tasks` and folds the results with `reduce`.
    pub fn map_reduce<T, M, R>(&self, tasks: u64, map: M, reduce: R) -> T
    where
        T: Send + Default,
        M: Fn(u64) -> T + Send + Sync,
        R: Fn(T, T) -> T + Send + Sync,
    {
        match *self {
            #[cfg(feature = "parallel")]
            Execution::Parallel { threads } => {
                use rayon::prelude::*;
                let run = || {
                    (0..tasks)
                        .into_par_iter()
                        .map(&map)
                        .reduce(T::default, &reduce)
                };
                match threads {
                    Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                        Ok(pool) => pool.install(run),
                        Err(_) => run(),
                    },
                    None => run(),
                }
            }
            _ => (0..tasks).map(map).fold(T::default(), reduce),
        }
    }
}
