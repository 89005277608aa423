//! Data-parallel helpers with a sequential fallback.
//!
//! Built with the `parallel` feature (default) these dispatch to rayon;
//! without it everything runs sequentially. `Strategy` lets benchmarks
//! compare both code paths in a single build.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Sequential,
    Parallel,
}

impl Default for Strategy {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Strategy::Parallel
        } else {
            Strategy::Sequential
        }
    }
}

/// Cap the global worker pool. First call wins; later calls and the
/// sequential build are no-ops.
pub fn configure_threads(n: usize) {
    #[cfg(feature = "parallel")]
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = n;
}

pub fn par_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    par_map_with(Strategy::default(), items, f)
}

pub fn par_map_with<T, U, F>(strategy: Strategy, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    match strategy {
        Strategy::Sequential => items.iter().map(f).collect(),
        Strategy::Parallel => {
            #[cfg(feature = "parallel")]
            {
                items.par_iter().map(f).collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                items.iter().map(f).collect()
            }
        }
    }
}

/// First Some(_) produced by `f`, if any. With rayon the search short
/// circuits via find_map_any; result identity does not depend on order
/// at the call sites (any witness is as good as another).
pub fn par_find_map<T, U, F>(items: &[T], f: F) -> Option<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Option<U> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().find_map_any(f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().find_map(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategies_agree() {
        let xs: Vec<u64> = (0..1000).collect();
        let a = par_map_with(Strategy::Sequential, &xs, |x| x * x);
        let b = par_map_with(Strategy::Parallel, &xs, |x| x * x);
        assert_eq!(a, b);
    }

    #[test]
    fn find_map_finds() {
        let xs: Vec<u64> = (0..100).collect();
        let hit = par_find_map(&xs, |&x| if x == 77 { Some(x) } else { None });
        assert_eq!(hit, Some(77));
        let miss = par_find_map(&xs, |&x| if x > 1000 { Some(x) } else { None });
        assert_eq!(miss, None);
    }
}
