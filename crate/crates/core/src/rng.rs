//! Seeded random streams.
//!
//! Each run owns one sampling generator and a family of noise substreams
//! keyed by the evaluation counter, so objective evaluations can be
//! dispatched in any order (or in parallel) without changing results.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SearchRng = ChaCha8Rng;

const NOISE_DOMAIN: u64 = 0x6e6f_6973_655f_7374;

pub fn search_rng(seed: u64) -> SearchRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Deterministic per-evaluation noise substreams derived from a run seed.
#[derive(Clone, Debug)]
pub struct NoiseStreams {
    key: [u8; 32],
}

impl NoiseStreams {
    pub fn new(seed: u64) -> Self {
        let mut key = [0u8; 32];
        ChaCha8Rng::seed_from_u64(seed ^ NOISE_DOMAIN).fill_bytes(&mut key);
        Self { key }
    }

    /// Generator dedicated to evaluation number `evaluation`.
    pub fn stream(&self, evaluation: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(evaluation);
        rng
    }
}
