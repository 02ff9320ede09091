//! Seeded random streams.
//!
//! Every stochastic operation draws from ChaCha8 keyed by the user seed.
//! Independent quantities (one stock's permutation, one factor's noise, one
//! sweep grid point) use distinct ChaCha stream ids under the same key, so
//! adding or removing one consumer never shifts another's draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}
