//! Order-preserving parallel map over index ranges. Results are always
//! collected in index order so downstream reductions are deterministic.

use std::ops::Range;

use crate::error::Result;

#[cfg(feature = "parallel")]
pub fn map<T, F>(range: Range<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    use rayon::prelude::*;
    range.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map<T, F>(range: Range<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    range.map(f).collect()
}

/// Like [`map`], failing with the error of the lowest failing index.
pub fn try_map<T, F>(range: Range<usize>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Send + Sync,
{
    map(range, f).into_iter().collect()
}
