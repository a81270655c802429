//! Seeded random streams. Every stochastic routine takes an explicit seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type UrnRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> UrnRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for run `run` of an ensemble seeded by `master`.
/// Depends only on `(master, run)`, never on scheduling.
pub fn substream(master: u64, run: u64) -> UrnRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(run);
    rng
}
