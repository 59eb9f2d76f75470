//! Thin dispatch layer between the rayon data-parallel path and the
//! sequential fallback. With the `parallel` feature enabled (the default),
//! `map_indexed` fans out over the rayon pool; indexed collection keeps the
//! output order, so results are identical to the sequential path regardless
//! of thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Applies `f` to `0..n` and collects the results in index order.
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        return (0..n).into_par_iter().map(f).collect();
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Sequential twin of [`map_indexed`]; always runs on the calling thread.
pub(crate) fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

// rayon's merge sort pays off only on large inputs; small slices stay on the
// calling thread either way, and the sorted output is the same.
#[cfg(feature = "parallel")]
const PAR_SORT_MIN_LEN: usize = 1 << 13;

/// Sorts a slice of (finite) times ascending.
pub(crate) fn sort_times(times: &mut [f64]) {
    #[cfg(feature = "parallel")]
    if times.len() >= PAR_SORT_MIN_LEN {
        times.par_sort_unstable_by(f64::total_cmp);
        return;
    }
    times.sort_unstable_by(f64::total_cmp);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_map_agree() {
        let par = map_indexed(100, |i| i * i);
        let seq = map_indexed_seq(100, |i| i * i);
        assert_eq!(par, seq);
    }

    #[test]
    fn sort_times_orders_ascending() {
        let mut v = vec![3.0, 1.0, 2.5, 1.0, 0.5];
        sort_times(&mut v);
        assert_eq!(v, vec![0.5, 1.0, 1.0, 2.5, 3.0]);
    }
}
