use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Open01, StandardNormal};

use crate::error::{LabError, Result};

/// Domain tag filling the last key word, so lab streams never collide with
/// a ChaCha key built from the same three integers elsewhere.
const KEY_TAG: u64 = 0x6f74_732d_6c61_6221;

/// A reproducible random stream addressed by `(master_seed, stream_id, substream_id)`.
///
/// The triple is written directly into the 256-bit ChaCha8 key, so each
/// address owns an independent keystream and no two addresses share state.
/// Streams are cheap to create and are never shared between threads.
#[derive(Clone, Debug)]
pub struct RngStream {
    master_seed: u64,
    stream_id: u64,
    substream_id: u64,
    core: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64, substream_id: u64) -> Self {
        let mut key = [0u8; 32];
        key[0..8].copy_from_slice(&master_seed.to_le_bytes());
        key[8..16].copy_from_slice(&stream_id.to_le_bytes());
        key[16..24].copy_from_slice(&substream_id.to_le_bytes());
        key[24..32].copy_from_slice(&KEY_TAG.to_le_bytes());
        Self {
            master_seed,
            stream_id,
            substream_id,
            core: ChaCha8Rng::from_seed(key),
        }
    }

    /// A sibling stream with the same master seed and stream id.
    pub fn substream(&self, substream_id: u64) -> Self {
        Self::new(self.master_seed, self.stream_id, substream_id)
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn substream_id(&self) -> u64 {
        self.substream_id
    }

    /// Uniform draw on the open interval (0, 1).
    pub fn uniform_open(&mut self) -> f64 {
        self.core.sample(Open01)
    }

    pub fn std_normal(&mut self) -> f64 {
        self.core.sample(StandardNormal)
    }

    /// Geometric draw on {1, 2, ...}, saturating at `u64::MAX`.
    pub fn geometric(&mut self, p: f64) -> Result<u64> {
        // float-to-int `as` saturates
        self.geometric_real(p).map(|g| g as u64)
    }

    /// Geometric draw on {1, 2, ...} returned as an integer-valued float, for
    /// success probabilities so small that the support overflows `u64`.
    pub fn geometric_real(&mut self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(LabError::domain(
                "sample_geometric",
                format!("p = {p} is not in (0, 1]"),
            ));
        }
        if p == 1.0 {
            return Ok(1.0);
        }
        let u = self.uniform_open();
        Ok((u.ln() / (-p).ln_1p()).ceil().max(1.0))
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.core.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.core.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.core.fill_bytes(dst)
    }
}

pub fn sample_std_normal(rng: &mut RngStream) -> f64 {
    rng.std_normal()
}

pub fn sample_geometric(p: f64, rng: &mut RngStream) -> Result<u64> {
    rng.geometric(p)
}
