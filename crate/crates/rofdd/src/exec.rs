//! Thread-pool executor that records how long each subdomain task takes.

use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;
use rofdd_core::Executor;

/// Timing of one [`for_each_mut`](Executor::for_each_mut) call.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BatchTiming {
    /// Wall-clock seconds of the whole call.
    pub batch: f64,
    /// Seconds per task, by index.
    pub tasks: Vec<f64>,
}

impl BatchTiming {
    pub fn slowest(&self) -> f64 {
        self.tasks.iter().copied().fold(0.0, f64::max)
    }
}

/// Runs tasks on a dedicated rayon pool and keeps the timings of every call
/// until they are taken.
pub struct PoolExecutor {
    pool: rayon::ThreadPool,
    workers: usize,
    timings: Mutex<Vec<BatchTiming>>,
}

impl PoolExecutor {
    pub fn new(workers: usize) -> Result<Self, rayon::ThreadPoolBuildError> {
        let workers = workers.max(1);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
        Ok(Self {
            pool,
            workers,
            timings: Mutex::new(Vec::new()),
        })
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    /// Timings of all calls since the previous take, oldest first.
    pub fn take_timings(&self) -> Vec<BatchTiming> {
        std::mem::take(&mut *self.timings.lock().expect("timing lock"))
    }
}

impl Executor for PoolExecutor {
    fn for_each_mut<S, F>(&self, items: &mut [S], task: F)
    where
        S: Send,
        F: Fn(usize, &mut S) + Sync + Send,
    {
        let start = Instant::now();
        let mut tasks = vec![0.0; items.len()];
        self.pool.install(|| {
            items
                .par_iter_mut()
                .zip(tasks.par_iter_mut())
                .enumerate()
                .for_each(|(i, (item, t))| {
                    let begin = Instant::now();
                    task(i, item);
                    *t = begin.elapsed().as_secs_f64();
                })
        });
        let batch = start.elapsed().as_secs_f64();
        self.timings.lock().expect("timing lock").push(BatchTiming { batch, tasks });
    }
}

/// Number of workers for `auto`: the available parallelism.
pub fn auto_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}
