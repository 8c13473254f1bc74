//! Deterministic derivation of per-task random streams.
//!
//! Every random quantity in the crate is drawn from a [`ChaCha8Rng`]
//! seeded through [`derive_seed`]. A stream is identified by the master
//! seed plus a short path of integers (trial index, martingale step,
//! inner-sample index, ...), so results depend only on those logical
//! coordinates and never on thread scheduling or worker count.

use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mix a master seed and a logical stream path into a single 64-bit seed.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    let mut acc = splitmix64(master);
    for &word in path {
        acc = splitmix64(acc ^ splitmix64(word));
    }
    acc
}

/// RNG for the stream identified by `path` under `master`.
pub fn stream_rng(master: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, path))
}
