//! Reproducible random streams.
//!
//! A chain is identified by `(seed, chain id)`: the seed keys a ChaCha8
//! generator and the chain id selects its stream, so chains never share
//! output regardless of how they are scheduled. The generator's word
//! position plays the role of the step counter.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const FREE_CHAIN: u64 = 0;
pub const PLUS_CHAIN: u64 = 1;

pub fn chain_rng(seed: u64, chain: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain);
    rng
}
