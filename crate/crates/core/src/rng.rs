//! Counter-based deterministic random streams.
//!
//! Every random draw in the simulator comes from a substream addressed by a
//! master seed plus a small key path, e.g. `(trial, NOISE, ap)`. Streams for
//! distinct key paths are statistically independent and, crucially, a draw
//! never depends on how many draws other streams made — so trials, paths, and
//! APs can be processed in any order or in parallel without changing results.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Key tags for the simulator's stream namespace.
pub const STREAM_POSITION: u64 = 1;
pub const STREAM_PHASE: u64 = 2;
pub const STREAM_NOISE: u64 = 3;

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a key into a seed, mixing thoroughly at each step.
pub fn mix(seed: u64, key: u64) -> u64 {
    let mut state = seed ^ key.wrapping_mul(0xA24B_AED4_963E_E407);
    let a = splitmix64(&mut state);
    let b = splitmix64(&mut state);
    a ^ b.rotate_left(23)
}

/// Deterministic substream for `keys` under `master`.
pub fn substream(master: u64, keys: &[u64]) -> ChaCha8Rng {
    let folded = keys.iter().fold(master, |acc, &k| mix(acc, k));
    let mut state = folded;
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

/// One draw from Uniform[0, 2pi).
pub fn uniform_phase<R: Rng>(rng: &mut R) -> f64 {
    rng.gen::<f64>() * 2.0 * PI
}

/// One circularly-symmetric complex Gaussian draw of total variance `var`
/// (each quadrature component has variance `var / 2`), via Box-Muller.
pub fn complex_gaussian<R: Rng>(rng: &mut R, var: f64) -> (f64, f64) {
    // open interval (0, 1] so the log never sees zero
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    let radius = (-var * u1.ln()).sqrt();
    let (s, c) = (2.0 * PI * u2).sin_cos();
    (radius * c, radius * s)
}
