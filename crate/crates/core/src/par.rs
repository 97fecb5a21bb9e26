//! Index-ordered data-parallel map with a sequential fallback.

use crate::error::{Error, Result};

/// Evaluates `f(0..n)` and returns the results in index order. Runs on the
/// current rayon pool when the `parallel` feature is on.
#[cfg(feature = "parallel")]
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Runs `f` on a dedicated pool of `threads` workers. `None` uses the global
/// pool. Without the `parallel` feature everything is sequential and the
/// thread count is ignored.
#[cfg(feature = "parallel")]
pub fn with_threads<R, F>(threads: Option<usize>, f: F) -> Result<R>
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::InvalidParameter("thread count must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidParameter(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

#[cfg(not(feature = "parallel"))]
pub fn with_threads<R, F>(threads: Option<usize>, f: F) -> Result<R>
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    if threads == Some(0) {
        return Err(Error::InvalidParameter("thread count must be at least 1".into()));
    }
    Ok(f())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preserves_index_order() {
        let v = with_threads(Some(4), || map_indexed(1000, |i| i * i)).unwrap();
        assert!(v.iter().enumerate().all(|(i, &x)| x == i * i));
    }

    #[test]
    fn zero_threads_rejected() {
        assert!(with_threads(Some(0), || ()).is_err());
    }
}
