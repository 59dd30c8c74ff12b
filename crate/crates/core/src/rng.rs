//! Seeded randomness.
//!
//! All algorithms take `&mut dyn RngCore`; experiments build their streams
//! here so results are a pure function of a 64-bit master seed. Per-trial
//! seeds are `splitmix64(master + (index + 1)·φ)`, where `φ = 0x9E3779B97F4A7C15`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The RNG used throughout experiments.
pub type SimRng = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// One output of the splitmix64 finalizer applied to `state`.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `index`-th independent stream derived from `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Independent stream number `index` under `master`.
pub fn stream(master: u64, index: u64) -> SimRng {
    rng_from_seed(derive_seed(master, index))
}
