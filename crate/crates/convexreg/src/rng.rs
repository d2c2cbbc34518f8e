//! Deterministic per-replication random streams.
//!
//! Every replication derives its own ChaCha8 stream from `(base seed,
//! replication index)`, so replications can run in any order or in parallel
//! and still draw identical numbers.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream for replication `index` of a study seeded with `base`.
pub fn replication_rng(base: u64, index: u64) -> ChaCha8Rng {
    // splitmix64-style mix keeps neighboring indices uncorrelated.
    let mut z = base ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    ChaCha8Rng::seed_from_u64(z ^ (z >> 31))
}
