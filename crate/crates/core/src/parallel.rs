//! Replicate scheduling. Results always come back in index order, so the
//! output does not depend on the number of workers.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Execution {
    /// Worker threads; 0 uses every available core, 1 runs inline.
    pub threads: usize,
}

impl Execution {
    pub fn sequential() -> Self {
        Self { threads: 1 }
    }

    pub fn with_threads(threads: usize) -> Self {
        Self { threads }
    }

    pub fn is_sequential(&self) -> bool {
        self.threads == 1 || !cfg!(feature = "parallel")
    }

    /// `(0..count).map(f)` evaluated on the configured workers.
    pub fn map<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        if self.is_sequential() {
            return (0..count).map(f).collect();
        }
        par_map(self.threads, count, f)
    }
}

#[cfg(feature = "parallel")]
fn par_map<T, F>(threads: usize, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(|| (0..count).into_par_iter().map(&f).collect()),
        Err(_) => (0..count).map(f).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
fn par_map<T, F>(_threads: usize, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..count).map(f).collect()
}
