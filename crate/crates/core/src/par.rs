//! Data-parallel helpers with a sequential fallback.
//!
//! Every helper produces the same result regardless of the `parallel`
//! feature and the size of the thread pool. Reductions are computed over a
//! fixed block layout and the block partials are combined in index order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Items per reduction block. Fixed so the reduction tree never depends on the
/// number of worker threads.
pub const REDUCTION_BLOCK: usize = 512;

pub fn num_threads() -> usize {
    #[cfg(feature = "parallel")]
    return rayon::current_num_threads();

    #[cfg(not(feature = "parallel"))]
    return 1;
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Calls `f(row_index, row)` for every `width`-sized row of `data`.
pub fn for_each_row_mut<F>(data: &mut [f64], width: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Send + Sync,
{
    assert!(width > 0 && data.len().is_multiple_of(width));
    #[cfg(feature = "parallel")]
    data.par_chunks_mut(width)
        .enumerate()
        .for_each(|(i, row)| f(i, row));

    #[cfg(not(feature = "parallel"))]
    data.chunks_mut(width)
        .enumerate()
        .for_each(|(i, row)| f(i, row));
}

/// Writes `f(row)` into `out[i]` for every `width`-sized row of `data`.
pub fn map_rows<F>(data: &[f64], width: usize, out: &mut [f64], f: F)
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
{
    assert!(width > 0 && data.len() == out.len() * width);
    #[cfg(feature = "parallel")]
    out.par_iter_mut()
        .zip(data.par_chunks(width))
        .for_each(|(o, row)| *o = f(row));

    #[cfg(not(feature = "parallel"))]
    out.iter_mut()
        .zip(data.chunks(width))
        .for_each(|(o, row)| *o = f(row));
}

/// Evaluates `f(0..n)` and collects the results in index order.
pub fn map_collect<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    #[cfg(feature = "parallel")]
    return (0..n).into_par_iter().map(f).collect();

    #[cfg(not(feature = "parallel"))]
    return (0..n).map(f).collect();
}

/// Sums `width` quantities over items `0..n`.
///
/// `term(i, out)` must overwrite all of `out` with item `i`'s contributions.
/// Items are grouped into blocks of [`REDUCTION_BLOCK`]; each block is summed
/// with compensation and the block totals are folded in block order.
pub fn block_reduce<F>(n: usize, width: usize, term: F) -> Vec<f64>
where
    F: Fn(usize, &mut [f64]) + Send + Sync,
{
    let blocks = n.div_ceil(REDUCTION_BLOCK);
    let partials = map_collect(blocks, |b| {
        let lo = b * REDUCTION_BLOCK;
        let hi = (lo + REDUCTION_BLOCK).min(n);
        let mut acc = vec![Compensated::default(); width];
        let mut scratch = vec![0.0; width];
        for i in lo..hi {
            term(i, &mut scratch);
            for (a, &x) in acc.iter_mut().zip(&scratch) {
                a.add(x);
            }
        }
        acc
    });
    let mut total = vec![Compensated::default(); width];
    for block in &partials {
        for (t, p) in total.iter_mut().zip(block) {
            t.add(p.sum);
            t.add(p.comp);
        }
    }
    total.iter().map(Compensated::value).collect()
}
