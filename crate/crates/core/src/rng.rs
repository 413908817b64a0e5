//! Seeded random streams.
//!
//! Every stochastic operation in the crate takes an explicit generator. A run
//! starts from one 64-bit seed; independent consumers (verifier, prover,
//! resampling, individual grid points) get their own ChaCha stream derived
//! from it, so results are bit-reproducible regardless of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type SimRng = ChaCha20Rng;

/// Well-known stream identifiers.
pub mod streams {
    pub const VERIFIER: u64 = 1;
    pub const PROVER: u64 = 2;
    pub const RESAMPLING: u64 = 3;
    pub const SAMPLING: u64 = 4;
}

/// Generator for `stream` under `seed`.
pub fn substream(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// SplitMix64 finalizer; used to derive child seeds (e.g. one per grid point).
pub fn mix(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
