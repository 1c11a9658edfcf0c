//! Seeded random streams.
//!
//! Every randomized computation draws from a ChaCha stream derived from a
//! base seed and a task index, so parallel suites give the same answer for
//! any thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// Independent stream for task `index` under `seed`.
pub fn stream(seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
