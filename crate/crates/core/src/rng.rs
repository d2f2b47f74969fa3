//! Seeded random streams.
//!
//! Every stream is a ChaCha8 generator keyed by the experiment's root seed
//! and a 64-bit stream id. Stream ids are derived by hashing a small tuple
//! (purpose, center, realization, extra), so any cell of an experiment grid
//! can be regenerated on its own, and the result does not depend on which
//! thread ran it or in what order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// What a stream is used for. Part of the stream key, so streams for
/// different purposes never coincide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Purpose {
    Center = 1,
    Start = 2,
    Orbit = 3,
    Bootstrap = 4,
    Synthetic = 5,
}

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { seed, stream, inner }
    }

    /// Stream for a keyed purpose under `seed`.
    pub fn keyed(seed: u64, purpose: Purpose, center: u64, realization: u64, extra: u64) -> Self {
        Self::new(seed, stream_id(purpose, center, realization, extra))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Uniform draw in [0, 1).
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Uniform index in `0..len`.
    #[inline]
    pub fn index(&mut self, len: usize) -> usize {
        self.inner.random_range(0..len)
    }
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic stream id for a (purpose, center, realization, extra) key.
pub fn stream_id(purpose: Purpose, center: u64, realization: u64, extra: u64) -> u64 {
    let mut h = splitmix64(purpose as u64);
    for part in [center, realization, extra] {
        h = splitmix64(h ^ part);
    }
    h
}
