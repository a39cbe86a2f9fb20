use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

use crate::{Error, Result};

/// Fixed-size pool of workers. Each block is processed by the worker that
/// owns it; a worker handles its blocks in ascending id order.
pub struct WorkerPool {
    pool: ThreadPool,
    workers: usize,
}

impl WorkerPool {
    pub fn new(workers: usize) -> Result<Self> {
        if workers == 0 {
            return Err(Error::InvalidArgument("worker count must be at least 1".into()));
        }
        let pool = ThreadPoolBuilder::new()
            .num_threads(workers)
            .thread_name(|i| format!("lbwind-worker-{i}"))
            .build()
            .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
        Ok(Self { pool, workers })
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    /// Runs `f` inside the pool so that nested rayon calls use its threads.
    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        self.pool.install(f)
    }

    /// Calls `f(block_id, item)` for every item, grouped by owner.
    pub fn for_each_block<T: Send, F>(&self, owners: &[usize], items: &mut [T], f: F) -> Result<()>
    where
        F: Fn(usize, &mut T) -> Result<()> + Sync,
    {
        assert_eq!(owners.len(), items.len());
        let mut groups: Vec<Vec<(usize, &mut T)>> = (0..self.workers).map(|_| Vec::new()).collect();
        for (id, item) in items.iter_mut().enumerate() {
            groups[owners[id] % self.workers].push((id, item));
        }
        self.pool.install(|| {
            groups.into_par_iter().with_max_len(1).try_for_each(|group| {
                for (id, item) in group {
                    f(id, item)?;
                }
                Ok(())
            })
        })
    }
}
