//! Counter-based Gaussian draws for initial perturbations.
//!
//! Every draw is addressed by `(seed, field, node)`: ChaCha20 is keyed with
//! `seed` (via `SeedableRng::seed_from_u64`), the stream id is the field
//! index (0 = u, 1 = v, 2 = w), and the block position is `4·node` words.
//! Two consecutive `u64` outputs feed one Box–Muller transform, keeping the
//! cosine branch. Draws are therefore independent of evaluation order.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Words consumed per node (two `u64`).
const WORDS_PER_NODE: u128 = 4;

pub struct NormalStream {
    rng: ChaCha20Rng,
}

impl NormalStream {
    pub fn new(seed: u64, field: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(field);
        NormalStream { rng }
    }

    /// Standard normal sample for `node`.
    pub fn sample(&mut self, node: usize) -> f64 {
        self.rng.set_word_pos(node as u128 * WORDS_PER_NODE);
        let a = self.rng.next_u64();
        let b = self.rng.next_u64();
        // u1 ∈ (0, 1], u2 ∈ [0, 1)
        let u1 = ((a >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = (b >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}
