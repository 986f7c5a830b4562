//! Execution policy for the data-parallel loops.
//!
//! The heavy loops (quadrature panels, t-grid sweeps) go through
//! [`ExecPolicy::map`]. Results are always collected in input order and any
//! reduction happens afterwards on a single thread, so output does not depend
//! on the number of worker threads.

/// How to evaluate independent work items.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecPolicy {
    /// Plain iterator on the calling thread.
    Sequential,
    /// Rayon work stealing on the current pool. Falls back to sequential
    /// evaluation when the crate is built without the `parallel` feature.
    #[default]
    Parallel,
}

impl ExecPolicy {
    /// True when this build can actually run in parallel.
    pub fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }

    /// Map `f` over `items`, preserving order.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            ExecPolicy::Sequential => items.iter().map(f).collect(),
            ExecPolicy::Parallel => par_map(items, f),
        }
    }
}

#[cfg(feature = "parallel")]
fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let xs: Vec<u64> = (0..10_000).collect();
        let a = ExecPolicy::Sequential.map(&xs, |x| x * x);
        let b = ExecPolicy::Parallel.map(&xs, |x| x * x);
        assert_eq!(a, b);
    }
}
