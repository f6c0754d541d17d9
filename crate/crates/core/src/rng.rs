//! Reproducible random streams: one master seed, one independent ChaCha
//! stream per replicate index.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Stream `index` derived from `seed`. Replicate `r` can be regenerated in
/// isolation from `(seed, r)`.
pub fn stream(seed: u64, index: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
