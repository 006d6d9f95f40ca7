//! Seeded random streams.
//!
//! Every stream is a ChaCha8 keystream keyed by a 64-bit seed. Independent
//! substreams (bootstrap replicates, trials) select a distinct ChaCha stream
//! id under the same key, so a replicate's draws depend only on
//! `(seed, index)` and never on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn substream(seed: u64, index: u64) -> SeededRng {
    let mut rng = seeded(seed);
    // stream 0 is the primary stream handed out by `seeded`
    rng.set_stream(index.wrapping_add(1));
    rng
}
