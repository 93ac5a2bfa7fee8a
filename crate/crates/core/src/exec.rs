//! Parallel/sequential execution switch.
//!
//! Fan-out points (bench sweeps, per-example verification, seed sweeps) all
//! funnel through [`map_collect`] so the crate has exactly one place where
//! rayon enters. With the `parallel` feature disabled the sequential path is
//! the only one compiled; with it enabled the caller still chooses per call,
//! which is what the comparison benches rely on.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `items`, preserving input order in the output.
pub fn map_collect<T, U, F>(items: &[T], parallel: bool, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if parallel {
            return items.par_iter().map(&f).collect();
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = parallel;
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preserves_order_in_both_modes() {
        let items: Vec<u64> = (0..100).collect();
        let seq = map_collect(&items, false, |x| x * x);
        let par = map_collect(&items, true, |x| x * x);
        assert_eq!(seq, par);
        assert_eq!(seq[7], 49);
    }
}
