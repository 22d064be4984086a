//! Deterministic substream derivation.
//!
//! Every random draw in this crate flows through a [`RngStream`] obtained
//! from [`substream`]. A stream is keyed by the root seed plus a label path
//! (purpose tag, column index, iteration, ...), so the numbers a column
//! receives do not depend on the order in which columns are processed, and
//! identical seeds reproduce identical output on any platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type RngStream = ChaCha8Rng;

/// Purpose tags keeping unrelated consumers on disjoint streams.
pub mod label {
    pub const SPLIT: u64 = 1;
    pub const GMM_INIT: u64 = 2;
    pub const MODE_NORMALIZE: u64 = 3;
    pub const SAMPLE: u64 = 4;
    pub const DISTORT: u64 = 5;
    pub const ENFORCE: u64 = 6;
    pub const TRAIN: u64 = 7;
    pub const ATTACK: u64 = 8;
    pub const BENCHMARK: u64 = 9;
}

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN_GAMMA);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Collapses a seed and a label path into a single 64-bit stream key.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    let mut state = seed;
    let mut acc = splitmix64(&mut state);
    for &part in path {
        state = acc ^ part.wrapping_mul(GOLDEN_GAMMA);
        acc = splitmix64(&mut state);
    }
    acc
}

/// Returns an independent ChaCha stream for `(seed, path)`.
pub fn substream(seed: u64, path: &[u64]) -> RngStream {
    let mut state = derive_seed(seed, path);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    RngStream::from_seed(key)
}
