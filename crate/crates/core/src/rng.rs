//! Counter-based noise streams.
//!
//! The standard normal variates for `(seed, particle, step)` are read from a
//! fixed region of a ChaCha8 keystream: the seed selects the key, the
//! particle selects the stream and the step selects a block of `2^32` words.
//! Axes are drawn in order from the start of that block with the ziggurat
//! sampler. Nothing depends on evaluation order, so particles can be
//! advanced on any number of threads.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// 32-bit keystream words reserved for one `(particle, step)` draw. The
/// sampler uses about two words per axis, so this never overflows.
const WORDS_PER_STEP: u128 = 1 << 32;

/// Stream index reserved for sampling initial positions.
pub(crate) const INIT_STREAM: u64 = u64::MAX;
/// Stream index reserved for deriving child seeds.
const DERIVE_STREAM: u64 = u64::MAX - 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngStream {
    seed: u64,
    axes: usize,
    keyed: ChaCha8Rng,
}

impl RngStream {
    /// A stream family for `axes`-dimensional increments.
    pub fn new(seed: u64, axes: usize) -> Self {
        assert!(axes > 0, "a noise stream needs at least one axis");
        RngStream {
            seed,
            axes,
            keyed: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn axes(&self) -> usize {
        self.axes
    }

    fn positioned(&self, particle: usize, step: usize) -> ChaCha8Rng {
        let mut rng = self.keyed.clone();
        rng.set_stream(particle as u64);
        rng.set_word_pos(step as u128 * WORDS_PER_STEP);
        rng
    }

    /// Standard normal increment for one `(particle, step, axis)` coordinate.
    /// Costs `axis + 1` draws; use [`RngStream::for_each_normal`] for whole rows.
    pub fn normal(&self, particle: usize, step: usize, axis: usize) -> f64 {
        debug_assert!(axis < self.axes);
        let mut rng = self.positioned(particle, step);
        for _ in 0..axis {
            let _: f64 = rng.sample(StandardNormal);
        }
        rng.sample(StandardNormal)
    }

    /// Calls `f(axis, z)` for every axis of `(particle, step)`, in axis order.
    /// Produces exactly the values of [`RngStream::normal`].
    #[inline]
    pub fn for_each_normal(&self, particle: usize, step: usize, mut f: impl FnMut(usize, f64)) {
        let mut rng = self.positioned(particle, step);
        for axis in 0..self.axes {
            f(axis, rng.sample(StandardNormal));
        }
    }
}

/// Sequential generator for sampling initial positions from `seed`.
pub(crate) fn init_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(INIT_STREAM);
    rng
}

/// Child seed for index `tag` under `base`, e.g. one seed per sweep cell.
pub fn derive_seed(base: u64, tag: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(DERIVE_STREAM);
    rng.set_word_pos(tag as u128 * 2);
    rng.next_u64()
}
