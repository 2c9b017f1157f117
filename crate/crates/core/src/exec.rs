//! Execution policy for the data-parallel inner loops.
//!
//! Every loop that can run on the rayon pool goes through the helpers in this
//! module. Work is always split into the same chunks regardless of policy and
//! reductions are combined in a fixed order, so sequential and parallel runs
//! produce bit-identical results. Without the `parallel` feature,
//! [`Exec::Parallel`] quietly runs sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How the inner loops execute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// True when work is actually dispatched to the thread pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

/// Evaluates `f(i)` for `i in 0..len` and collects in index order.
pub(crate) fn map_indexed<R, F>(exec: Exec, len: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..len).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..len).map(f).collect()
}

/// Maps over a slice, collecting in order.
pub(crate) fn map_slice<T, R, F>(exec: Exec, items: &[T], f: F) -> Vec<R>
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

/// Runs `f(state, chunk_index, chunk)` over consecutive `chunk_len`-sized
/// chunks, with per-worker state built by `init`.
pub(crate) fn chunks_mut_init<T, S, I, F>(exec: Exec, data: &mut [T], chunk_len: usize, init: I, f: F)
where
    T: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        data.par_chunks_mut(chunk_len)
            .enumerate()
            .for_each_init(&init, |s, (i, c)| f(s, i, c));
        return;
    }
    let _ = exec;
    let mut state = init();
    for (i, chunk) in data.chunks_mut(chunk_len).enumerate() {
        f(&mut state, i, chunk);
    }
}

/// Compensated (Neumaier) summation.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub(crate) fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::default();
        for v in iter {
            s.add(v);
        }
        s
    }
}

/// Sums `f(i)` over `0..len` in fixed row-sized blocks, each block summed with
/// compensation, then the block sums combined in order.
pub(crate) fn block_sum<F>(exec: Exec, len: usize, block: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let block = block.max(1);
    let n_blocks = len.div_ceil(block);
    let partial = map_indexed(exec, n_blocks, |b| {
        let start = b * block;
        let end = (start + block).min(len);
        (start..end).map(&f).collect::<NeumaierSum>().value()
    });
    partial.into_iter().collect::<NeumaierSum>().value()
}
