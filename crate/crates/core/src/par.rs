//! Data-parallel helpers with a sequential fallback.
//!
//! With the default `parallel` feature the helpers fan work out over rayon;
//! without it they run plain sequential loops. Callers are written so the
//! result is bit-identical either way: work items are indexed, mapped
//! independently, and reduced in index order (or with exact integer sums).

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `0..n` and returns the results in index order.
pub fn map_indexed<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Splits `0..len` into roughly `tasks` contiguous ranges.
pub fn split_ranges(len: u64, tasks: usize) -> Vec<std::ops::Range<u64>> {
    let tasks = tasks.max(1) as u64;
    let chunk = len.div_ceil(tasks).max(1);
    let mut out = Vec::new();
    let mut start = 0;
    while start < len {
        let end = (start + chunk).min(len);
        out.push(start..end);
        start = end;
    }
    out
}

/// Number of worker tasks to split enumeration ranges into.
pub fn task_count() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_cover_everything_once() {
        for len in [0u64, 1, 7, 64, 1000] {
            for tasks in [1usize, 3, 8] {
                let ranges = split_ranges(len, tasks);
                let total: u64 = ranges.iter().map(|r| r.end - r.start).sum();
                assert_eq!(total, len);
                for w in ranges.windows(2) {
                    assert_eq!(w[0].end, w[1].start);
                }
            }
        }
    }
}
