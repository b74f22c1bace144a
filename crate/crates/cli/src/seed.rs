//! Per-stage seeds derived from the root seed.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stochastic stages. The discriminant picks the stream of the root seed,
/// so adding a stage never shifts the seeds of the others.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Synth = 1,
    Drift = 2,
    Channel = 3,
}

pub fn split(root: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(root);
    rng.set_stream(stream);
    rng.next_u64()
}

pub fn stage_seed(root: u64, stage: Stage) -> u64 {
    split(root, stage as u64)
}

/// Seed of the draws for one delay; keyed by the delay value so that the
/// channel at a given delay does not depend on the rest of the delay list.
pub fn delay_seed(stage_seed: u64, delay: f64) -> u64 {
    split(stage_seed, delay.to_bits())
}
