//! Batch mapping that uses rayon when the `parallel` feature is enabled
//! and falls back to a plain sequential loop otherwise.
//!
//! Results are collected in input order either way, so batch outputs are
//! byte-identical regardless of the worker count. `map_batch_seq` is
//! always available for benchmarking the two paths against each other.

/// Sequential batch map, available unconditionally.
pub fn map_batch_seq<T, R>(items: &[T], f: impl Fn(&T) -> R) -> Vec<R> {
    items.iter().map(f).collect()
}

/// Order-preserving batch map over the configured worker pool.
#[cfg(feature = "parallel")]
pub fn map_batch<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

/// Order-preserving batch map; sequential fallback.
#[cfg(not(feature = "parallel"))]
pub fn map_batch<T, R>(items: &[T], f: impl Fn(&T) -> R) -> Vec<R> {
    map_batch_seq(items, f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batch_preserves_order() {
        let items: Vec<u64> = (0..1000).collect();
        let doubled = map_batch(&items, |x| x * 2);
        let doubled_seq = map_batch_seq(&items, |x| x * 2);
        assert_eq!(doubled, doubled_seq);
        assert_eq!(doubled[500], 1000);
    }
}
