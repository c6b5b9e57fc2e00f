//! Execution of independent per-subdomain tasks.
//!
//! The decomposition solvers hand every subdomain's state to an [`Executor`]
//! once per outer iteration. Tasks never share mutable state and results are
//! combined afterwards in subdomain order, so any executor yields bitwise
//! identical results.

/// Runs `task(index, item)` once for every item, in any order and on any
/// thread.
pub trait Executor: Sync {
    fn for_each_mut<S, F>(&self, items: &mut [S], task: F)
    where
        S: Send,
        F: Fn(usize, &mut S) + Sync + Send;
}

/// Runs every task on the calling thread, in index order.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn for_each_mut<S, F>(&self, items: &mut [S], task: F)
    where
        S: Send,
        F: Fn(usize, &mut S) + Sync + Send,
    {
        for (i, item) in items.iter_mut().enumerate() {
            task(i, item);
        }
    }
}

impl<E: Executor> Executor for &E {
    fn for_each_mut<S, F>(&self, items: &mut [S], task: F)
    where
        S: Send,
        F: Fn(usize, &mut S) + Sync + Send,
    {
        (**self).for_each_mut(items, task)
    }
}
