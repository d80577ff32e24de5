//! Data-parallel helpers. With the `parallel` feature the work is spread
//! over the rayon pool; without it every call runs sequentially. Results are
//! always returned in input order, so both modes are observably identical.

/// How batch and enumeration work is scheduled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    /// Uses rayon when built with the `parallel` feature, otherwise falls
    /// back to sequential execution.
    #[default]
    Parallel,
}

impl Parallelism {
    /// Whether this build can actually run work in parallel.
    pub fn available() -> bool {
        cfg!(feature = "parallel")
    }
}

pub(crate) fn map<T, R, F>(items: &[T], mode: Parallelism, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        Parallelism::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let xs: Vec<u64> = (0..1000).collect();
        let a = map(&xs, Parallelism::Sequential, |x| x * x);
        let b = map(&xs, Parallelism::Parallel, |x| x * x);
        assert_eq!(a, b);
    }
}
