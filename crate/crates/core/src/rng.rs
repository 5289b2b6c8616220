//! Seeded random streams.
//!
//! Every stochastic routine in the crate takes an explicit `&mut impl Rng`.
//! Simulations create their streams here so that a run is fully determined by
//! its seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The random stream used throughout the simulator.
pub type SimRng = ChaCha8Rng;

/// Creates a stream from a 64-bit seed.
pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent child seed from a base seed and a path of labels
/// (block index, retry attempt, ...).
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    let mut state = splitmix64(base);
    for &label in path {
        state = splitmix64(state ^ splitmix64(label.wrapping_add(0x632B_E59B_D9B4_E019)));
    }
    state
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
