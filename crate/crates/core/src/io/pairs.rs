//! Source/target frame-pair sampling from a trajectory.
//!
//! Each sample draws a stride in `1..=10`, a 10-frame window at that stride,
//! and two distinct frames from the window.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const WINDOW_FRAMES: usize = 10;
pub const MAX_INTERVAL: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairSample {
    pub interval: usize,
    /// First frame of the strided window.
    pub start: usize,
    pub source: usize,
    pub target: usize,
}

impl PairSample {
    /// Frame indices of the window this pair was drawn from.
    pub fn window(&self) -> impl Iterator<Item = usize> + '_ {
        (0..WINDOW_FRAMES).map(move |i| self.start + i * self.interval)
    }
}

/// Largest stride whose 10-frame window fits in `frames` frames.
pub fn max_feasible_interval(frames: usize) -> usize {
    if frames < WINDOW_FRAMES {
        return 0;
    }
    ((frames - 1) / (WINDOW_FRAMES - 1)).min(MAX_INTERVAL)
}

/// Draws one pair from the window at a fixed stride.
pub fn sample_pair_with_interval(frames: usize, interval: usize, rng: &mut impl Rng) -> Result<PairSample> {
    if interval == 0 || interval > max_feasible_interval(frames) {
        return Err(Error::arg(format!(
            "a 10-frame window at stride {interval} does not fit in {frames} frames"
        )));
    }
    let span = (WINDOW_FRAMES - 1) * interval;
    let start = rng.random_range(0..frames - span);
    let picked = sample(rng, WINDOW_FRAMES, 2);
    Ok(PairSample {
        interval,
        start,
        source: start + picked.index(0) * interval,
        target: start + picked.index(1) * interval,
    })
}

/// `count` pairs from a trajectory of `frames` frames, reproducible from `seed`.
///
/// Strides are drawn uniformly from those whose window fits the trajectory;
/// fewer than 10 frames is an error.
pub fn sample_training_pairs(frames: usize, seed: u64, count: usize) -> Result<Vec<PairSample>> {
    let max_interval = max_feasible_interval(frames);
    if max_interval == 0 {
        return Err(Error::degenerate(format!(
            "trajectory has {frames} frames, at least {WINDOW_FRAMES} are needed"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let interval = rng.random_range(1..=max_interval);
            sample_pair_with_interval(frames, interval, &mut rng)
        })
        .collect()
}
