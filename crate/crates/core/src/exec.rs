//! Execution policy for data-parallel loops.
//!
//! Every parallel loop in the crate maps over an indexed collection and
//! gathers results in input order, so the output is identical for any
//! worker count. Reductions happen sequentially on the gathered vector.

/// How to run a data-parallel loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Rayon with the given worker count (`0` means the rayon default).
    /// Without the `parallel` feature this falls back to sequential.
    Parallel { workers: usize },
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel { workers: 0 }
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    pub fn with_workers(workers: usize) -> Self {
        if workers == 1 {
            Execution::Sequential
        } else {
            Execution::Parallel { workers }
        }
    }

    pub fn is_parallel(&self) -> bool {
        cfg!(feature = "parallel") && matches!(self, Execution::Parallel { .. })
    }

    /// Map `f` over `0..len`, results in index order.
    pub fn map_range<T, F>(&self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if let Execution::Parallel { workers } = *self {
            use rayon::prelude::*;
            let run = || (0..len).into_par_iter().map(&f).collect::<Vec<T>>();
            return install(workers, run);
        }
        (0..len).map(f).collect()
    }

    /// Map `f` over a slice, results in input order.
    pub fn map_slice<I, T, F>(&self, items: &[I], f: F) -> Vec<T>
    where
        I: Sync,
        T: Send,
        F: Fn(&I) -> T + Sync + Send,
    {
        self.map_range(items.len(), |i| f(&items[i]))
    }
}

#[cfg(feature = "parallel")]
fn install<T: Send>(workers: usize, run: impl FnOnce() -> T + Send) -> T {
    if workers == 0 {
        return run();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(run),
        Err(_) => run(),
    }
}
