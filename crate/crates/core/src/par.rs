//! Execution strategy for the data-parallel kernels.
//!
//! Every hot loop in the crate (erosion rows, thinning candidate scans,
//! palette assignment, per-image batch builds) goes through the helpers in
//! this module. With the `parallel` feature they fan out over rayon; without
//! it, or when [`Parallelism::Sequential`] is requested explicitly, they run
//! on the calling thread. Both paths produce identical results: work items
//! are independent and results are collected in input order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Selects how a kernel distributes its work.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    /// Uses the global rayon pool. Falls back to sequential execution when
    /// the crate is built without the `parallel` feature.
    Rayon,
}

impl Default for Parallelism {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Parallelism::Rayon
        } else {
            Parallelism::Sequential
        }
    }
}

impl Parallelism {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Parallelism::Rayon
    }
}

/// Maps `f` over `items`, preserving order.
pub fn map<T, R, F>(par: Parallelism, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if par.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = par;
    items.iter().map(f).collect()
}

/// Maps `f` over `0..n`, preserving order.
pub fn map_range<R, F>(par: Parallelism, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if par.is_parallel() {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = par;
    (0..n).map(f).collect()
}

/// Calls `f(row_index, row)` for every `row_len`-sized chunk of `buf`.
pub fn for_each_row<T, F>(par: Parallelism, buf: &mut [T], row_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    if row_len == 0 {
        return;
    }
    #[cfg(feature = "parallel")]
    if par.is_parallel() {
        buf.par_chunks_mut(row_len)
            .enumerate()
            .for_each(|(y, row)| f(y, row));
        return;
    }
    let _ = par;
    buf.chunks_mut(row_len)
        .enumerate()
        .for_each(|(y, row)| f(y, row));
}

/// Runs `f` on a dedicated pool capped at `max_threads` workers (bounded
/// in-flight work). Sequential builds simply call `f`.
pub fn with_bound<R, F>(max_threads: usize, f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new()
            .num_threads(max_threads.max(1))
            .build()
        {
            return pool.install(f);
        }
    }
    let _ = max_threads;
    f()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_strategies_agree() {
        let items: Vec<u32> = (0..1000).collect();
        let a = map(Parallelism::Sequential, &items, |x| x * 3 + 1);
        let b = map(Parallelism::Rayon, &items, |x| x * 3 + 1);
        assert_eq!(a, b);
        assert_eq!(
            map_range(Parallelism::Sequential, 17, |i| i * i),
            map_range(Parallelism::Rayon, 17, |i| i * i)
        );
    }

    #[test]
    fn rows_visit_every_chunk() {
        let mut buf = vec![0usize; 12];
        for_each_row(Parallelism::default(), &mut buf, 4, |y, row| {
            row.iter_mut().for_each(|v| *v = y)
        });
        assert_eq!(buf, vec![0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2]);
    }
}
