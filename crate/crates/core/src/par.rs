//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the [`Exec::Parallel`] strategy runs on the
//! rayon pool. Without it both strategies run on the calling thread.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// Order-preserving map.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel if items.len() > 1 => items.par_iter().map(f).collect(),
            _ => items.iter().map(f).collect(),
        }
    }

    pub fn map_range<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel if n > 1 => (0..n).into_par_iter().map(f).collect(),
            _ => (0..n).map(f).collect(),
        }
    }

    /// Downgrades to sequential below `min` items, where task overhead dominates.
    pub fn above(self, n: usize, min: usize) -> Exec {
        if n < min {
            Exec::Sequential
        } else {
            self
        }
    }
}

pub fn current_num_threads() -> usize {
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
    fn maps_keep_order() {
        let xs: Vec<u64> = (0..1000).collect();
        for exec in [Exec::Sequential, Exec::Parallel] {
            assert_eq!(exec.map(&xs, |x| x * x), xs.iter().map(|x| x * x).collect::<Vec<_>>());
            assert_eq!(exec.map_range(7, |i| i + 1), [1, 2, 3, 4, 5, 6, 7]);
            assert!(exec.map(&[] as &[u8], |x| *x).is_empty());
        }
        assert_eq!(Exec::Parallel.above(3, 4), Exec::Sequential);
        assert_eq!(Exec::Parallel.above(4, 4), Exec::Parallel);
        assert!(current_num_threads() >= 1);
    }
}
