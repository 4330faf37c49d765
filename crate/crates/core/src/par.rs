//! Node-level fan-out. With the `parallel` feature the work runs on the rayon
//! pool; without it, or under [`Execution::Sequential`], it runs inline.
//! Results always come back in index order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::Result;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Execution {
    /// Fan out over the current rayon pool (sequential when built without `parallel`).
    #[default]
    Parallel,
    Sequential,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Number of worker threads `Execution::Parallel` would use.
pub fn num_threads() -> usize {
    #[cfg(feature = "parallel")]
    return rayon::current_num_threads();

    #[cfg(not(feature = "parallel"))]
    return 1;
}

pub(crate) fn map_indexed<T, F>(exec: Execution, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..count).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..count).map(f).collect()
}

/// Like [`map_indexed`], but fails with the error of the lowest failing index so
/// the reported error does not depend on scheduling.
pub(crate) fn try_map_indexed<T, F>(exec: Execution, count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Send + Sync,
{
    map_indexed(exec, count, f).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::NepError;

    #[test]
    fn keeps_index_order() {
        for exec in [Execution::Parallel, Execution::Sequential] {
            let v = map_indexed(exec, 100, |i| i * i);
            assert_eq!(v, (0..100).map(|i| i * i).collect::<Vec<_>>());
        }
    }

    #[test]
    fn reports_first_failure() {
        let r: Result<Vec<usize>> = try_map_indexed(Execution::Parallel, 50, |i| {
            if i % 7 == 3 {
                Err(NepError::invalid(format!("{i}")))
            } else {
                Ok(i)
            }
        });
        match r {
            Err(NepError::InvalidParameter(s)) => assert_eq!(s, "3"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
