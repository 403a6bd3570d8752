//! Deterministic random substreams.
//!
//! Every stochastic quantity in the simulator draws from a stream derived
//! from the master seed and a path of integer tags (experiment, sweep point,
//! trial, ...). Streams with distinct paths are statistically independent,
//! so Monte Carlo work can be distributed across threads while the result
//! stays a pure function of (config, seed).

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags used by the library. Keeping them in one place avoids
/// accidental collisions between substream families.
pub mod tag {
    pub const DATASET_RSUS: u64 = 1;
    pub const DATASET_BLOCK: u64 = 2;
    pub const DATASET_SPLIT: u64 = 3;
    pub const SWEEP_POINT: u64 = 4;
    pub const ROC_POINT: u64 = 5;
    pub const TRAIN: u64 = 6;
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive an independent stream from a master seed and a tag path.
pub fn substream(master_seed: u64, path: &[u64]) -> ChaCha8Rng {
    let mut state = master_seed;
    let mut acc = splitmix64(&mut state);
    for &p in path {
        state ^= p.wrapping_mul(0xD6E8_FEB8_6659_FD93);
        acc ^= splitmix64(&mut state);
    }
    let mut seed = [0u8; 32];
    let mut s = acc;
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut s).to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}
