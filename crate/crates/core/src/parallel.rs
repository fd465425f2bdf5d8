use rayon::prelude::*;

use crate::error::{Error, Result};

/// Runs independent work items, either inline or on a dedicated rayon pool.
///
/// Results always come back in item order, so any reduction over them is
/// independent of the worker count.
pub struct Executor {
    pool: Option<rayon::ThreadPool>,
    workers: usize,
}

impl Executor {
    pub fn serial() -> Self {
        Self { pool: None, workers: 1 }
    }

    pub fn new(workers: usize) -> Result<Self> {
        if workers == 0 {
            return Err(Error::InvalidArgument("worker count must be at least 1".into()));
        }
        if workers == 1 {
            return Ok(Self::serial());
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
        Ok(Self { pool: Some(pool), workers })
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match &self.pool {
            None => (0..n).map(f).collect(),
            Some(pool) => pool.install(|| (0..n).into_par_iter().map(f).collect()),
        }
    }

    pub fn try_map<T, F>(&self, n: usize, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize) -> Result<T> + Sync + Send,
    {
        self.map(n, f).into_iter().collect()
    }
}

impl Default for Executor {
    fn default() -> Self {
        Self::serial()
    }
}
