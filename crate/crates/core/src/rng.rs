//! Seeded random streams.
//!
//! Every consumer of randomness owns a ChaCha stream derived from one run
//! seed, so adding draws on one path never perturbs another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Named stream identifiers.
pub mod streams {
    pub const ENV: u64 = 1;
    pub const EXPLORATION: u64 = 2;
    pub const REPLAY: u64 = 3;
    pub const WEAK_AUG: u64 = 4;
    pub const STRONG_ACTOR: u64 = 5;
    pub const STRONG_CRITIC: u64 = 6;
    pub const STRONG_TARGET: u64 = 7;
    pub const POLICY_NOISE: u64 = 8;
    pub const INIT: u64 = 9;
    pub const EVAL: u64 = 10;
    pub const PERTURBATION: u64 = 11;
    pub const DYNAMICS: u64 = 12;
}

/// Independent stream `id` of the generator seeded by `seed`.
pub fn stream(seed: u64, id: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// SplitMix64 finaliser; used to derive child seeds (episode seeds and the like).
pub fn mix(seed: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
