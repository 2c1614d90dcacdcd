//! Reproducible random streams.
//!
//! Every Monte Carlo sample draws from its own ChaCha8 stream: the generator
//! is keyed by a 64-bit seed (the master seed mixed with an estimand key via
//! SplitMix64) and the stream id is the sample index. Outcomes therefore do
//! not depend on which worker runs a sample or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One SplitMix64 output for `x`.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for the estimand identified by `key` under `master`.
pub fn derive_seed(master: u64, key: u64) -> u64 {
    splitmix64(master ^ splitmix64(key))
}

/// Generator for sample `index` of the stream family keyed by `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
