//! Execution strategy for the data-parallel kernels.
//!
//! With the `parallel` feature the kernels use rayon; without it, or when
//! [`Execution::Sequential`] is selected at runtime, they run on the calling
//! thread. Both paths produce bit-identical results because every reduction
//! is performed in a fixed order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Parallel,
    Sequential,
}

impl Execution {
    /// True when work will actually be spread across threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Maps `f` over `items`, keeping input order in the output.
pub fn map<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Applies `f` to every element of `items` in place.
pub fn for_each_mut<T, F>(exec: Execution, items: &mut [T], f: F)
where
    T: Send,
    F: Fn(&mut T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        items.par_iter_mut().for_each(f);
        return;
    }
    let _ = exec;
    items.iter_mut().for_each(f);
}

/// Calls `f(chunk_index, chunk)` for consecutive chunks of `data`.
pub fn for_each_chunk_mut<T, F>(exec: Execution, data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    let chunk = chunk.max(1);
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        data.par_chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
        return;
    }
    let _ = exec;
    data.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order_in_both_modes() {
        let v: Vec<u32> = (0..1000).collect();
        let a = map(Execution::Parallel, &v, |x| x * 3);
        let b = map(Execution::Sequential, &v, |x| x * 3);
        assert_eq!(a, b);
        assert_eq!(a[999], 2997);
    }

    #[test]
    fn chunked_fill_matches() {
        let mut a = vec![0usize; 1003];
        let mut b = vec![0usize; 1003];
        for_each_chunk_mut(Execution::Parallel, &mut a, 100, |ci, c| {
            for (k, x) in c.iter_mut().enumerate() {
                *x = ci * 100 + k;
            }
        });
        for_each_chunk_mut(Execution::Sequential, &mut b, 100, |ci, c| {
            for (k, x) in c.iter_mut().enumerate() {
                *x = ci * 100 + k;
            }
        });
        assert_eq!(a, b);
        assert!(a.iter().enumerate().all(|(i, &x)| i == x));
    }
}
