//! Counter-based random substreams.
//!
//! Every random draw in a run is addressed by a key path (purpose, cycle,
//! node, draw index, ...) hashed together with the global seed, so results
//! never depend on the order in which nodes are evaluated.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream purposes. Distinct tags keep independent consumers apart.
pub mod purpose {
    pub const PRUNE_X: u64 = 1;
    pub const PRUNE_Y: u64 = 2;
    pub const GOSSIP: u64 = 3;
    pub const INITIAL_STATE: u64 = 4;
    pub const GRAPH: u64 = 5;
    pub const DATA: u64 = 6;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hashes a seed and a key path into a single 64-bit seed.
pub fn derive_seed(seed: u64, keys: &[u64]) -> u64 {
    keys.iter()
        .fold(splitmix64(seed), |h, &k| splitmix64(h ^ splitmix64(k.wrapping_add(0x632b_e59b_d9b4_e019))))
}

pub fn substream(seed: u64, keys: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, keys))
}
