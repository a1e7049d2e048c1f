//! Seeded, streamable source of uniform and normal variates.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use statrs::function::erf::erfc_inv;

/// ChaCha20 keyed by `seed`, on stream `stream_id`. Distinct stream ids give
/// independent sequences for the same seed; the output depends only on
/// `(seed, stream_id)` and the number of values already drawn.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha20Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Position in the keystream, in 32-bit words.
    pub fn word_pos(&self) -> u128 {
        self.rng.get_word_pos()
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on the open interval `(0, 1)`: `(⌊x / 2^11⌋ + 1/2) 2^{-53}`.
    pub fn next_uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal by inversion: `Φ^{-1}(u) = -√2 erfc^{-1}(2u)`.
    /// Consumes exactly one 64-bit word.
    pub fn next_normal(&mut self) -> f64 {
        let u = self.next_uniform();
        -std::f64::consts::SQRT_2 * erfc_inv(2.0 * u)
    }
}
