//! Deterministic seed derivation and seeded Gaussian sampling.
//!
//! Every random quantity in the crate is drawn from a generator seeded by a
//! value derived from one master seed plus a list of integer salts. Parallel
//! and serial execution therefore produce bit-identical results, and paired
//! benchmark comparisons can regenerate the exact instance a trial used.

use ndarray::Array2;
use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

/// Salt namespaces so the derivation trees of unrelated consumers of one
/// master seed cannot collide.
pub(crate) mod salts {
    pub const SKETCH: u64 = 1;
    pub const ALS_INIT: u64 = 2;
    pub const RESTART: u64 = 3;
    pub const CELL: u64 = 4;
    pub const INSTANCE: u64 = 5;
    pub const ALGO: u64 = 6;
}

fn splitmix64(state: &mut u64) {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    *state = z ^ (z >> 31);
}

/// Derive a child seed from a master seed and a sequence of salts.
///
/// Distinct salt sequences give statistically independent streams.
pub fn derive_seed(master: u64, salts: &[u64]) -> u64 {
    let mut state = master ^ 0x51_7c_c1_b7_27_22_0a_95;
    splitmix64(&mut state);
    for &salt in salts {
        state ^= salt.wrapping_mul(0xff51_afd7_ed55_8ccd).wrapping_add(1);
        splitmix64(&mut state);
    }
    state
}

/// Standard-Gaussian matrix with entries drawn row-major from the seed.
pub fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
    let mut rng = StdRng::seed_from_u64(seed);
    Array2::from_shape_simple_fn((rows, cols), || StandardNormal.sample(&mut rng))
}

/// Standard-Gaussian buffer of `len` entries.
pub fn gaussian_vec(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..len).map(|_| StandardNormal.sample(&mut rng)).collect()
}
