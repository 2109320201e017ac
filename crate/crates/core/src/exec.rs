//! Execution policy for the embarrassingly parallel outer loops (parameter
//! scans, batches of density reconstructions). Time stepping is always serial.

/// Environment variable capping the worker count of parallel loops.
pub const THREADS_ENV: &str = "ELAPSED_NEURONS_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Falls back to sequential when built without the `parallel` feature.
    #[default]
    Parallel,
}

impl Execution {
    /// Worker cap from [`THREADS_ENV`], if set to a positive integer.
    pub fn thread_cap() -> Option<usize> {
        std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|n| *n > 0)
    }

    pub fn is_parallel(&self) -> bool {
        cfg!(feature = "parallel") && *self == Execution::Parallel
    }

    /// Maps `f` over `items`, preserving order.
    pub fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() && items.len() > 1 {
            use rayon::prelude::*;
            let run = || items.par_iter().map(&f).collect::<Vec<R>>();
            return match Self::thread_cap() {
                Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                    Ok(pool) => pool.install(run),
                    Err(_) => run(),
                },
                None => run(),
            };
        }
        items.iter().map(f).collect()
    }
}
