//! Block execution: the same ordered map over index blocks, run either on the
//! calling thread or on the rayon pool (feature `parallel`).
//!
//! Results always come back in block order, so reductions performed by the
//! caller see identical inputs under both policies.

use std::ops::Range;

use serde::{Deserialize, Serialize};

/// Default number of samples per block.
pub const DEFAULT_BLOCK: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Exec {
    Sequential,
    /// Falls back to sequential when the `parallel` feature is disabled.
    #[default]
    Parallel,
}

/// Splits `range` into consecutive blocks of at most `block` indices.
pub fn blocks(range: Range<u64>, block: u64) -> Vec<Range<u64>> {
    let block = block.max(1);
    let mut out = Vec::new();
    let mut start = range.start;
    while start < range.end {
        let end = (start + block).min(range.end);
        out.push(start..end);
        start = end;
    }
    out
}

/// Maps `f` over `items`, preserving order.
pub fn map_ordered<T, R, F>(exec: Exec, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        Exec::Sequential => items.iter().map(f).collect(),
        Exec::Parallel => parallel_map(items, f),
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.iter().map(f).collect()
}
