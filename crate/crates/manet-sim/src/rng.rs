//! Deterministic randomness.
//!
//! All randomness flows through ChaCha12 (`rand_chacha`), a fixed, portable
//! generator: the same seed yields the same byte stream on every platform and
//! toolchain. Per-node sub-streams use the cipher's independent stream
//! counter, so adding nodes to a scenario never perturbs the draws of
//! existing nodes.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Stream id for scenario-level draws (session workload).
pub const STREAM_SCENARIO: u64 = 0;
/// Base stream id for per-node mobility draws.
pub const STREAM_MOBILITY_BASE: u64 = 1 << 20;
/// Base stream id for per-node attribute draws (position, range, energy).
pub const STREAM_ATTR_BASE: u64 = 2 << 20;

/// Seeded uniform stream.
pub struct SimRng {
    inner: ChaCha12Rng,
}

impl SimRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha12Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        SimRng { inner }
    }

    /// Uniform real in `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform real in `[min, max]`.
    pub fn uniform_in(&mut self, r: crate::types::Range) -> f64 {
        r.min + self.uniform() * (r.max - r.min)
    }

    /// Uniform integer in `[0, n)`.
    pub fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        // Modulo bias is < 2^-40 for all n used here (n <= a few thousand).
        self.inner.next_u64() % n
    }

    /// Exponential variate with the given rate (events per tick).
    pub fn exp(&mut self, rate: f64) -> f64 {
        debug_assert!(rate > 0.0);
        let u = self.uniform();
        -(1.0 - u).ln() / rate
    }
}
