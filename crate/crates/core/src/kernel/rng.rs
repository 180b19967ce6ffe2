//! Keyed random-number substreams.
//!
//! A stream is a ChaCha8 generator whose 256-bit key is expanded from the
//! master seed and whose 64-bit stream id is the substream index. Two streams
//! with the same `(master_seed, stream_index)` produce identical sequences no
//! matter how many other streams exist or which thread drives them, so Monte
//! Carlo loops keyed by draw index are invariant to the worker count.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TWO_POW_NEG_53: f64 = 1.0 / (1u64 << 53) as f64;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a tag into a seed, giving the master seed of a child family of
/// substreams. Used to separate e.g. data generation from prior draws.
pub fn derive_seed(master_seed: u64, tag: u64) -> u64 {
    let mut state = master_seed ^ tag.rotate_left(32);
    let a = splitmix64(&mut state);
    let mut state = a ^ tag;
    splitmix64(&mut state)
}

/// Deterministic single-owner generator.
#[derive(Debug, Clone)]
pub struct RngStream {
    rng: ChaCha8Rng,
    master_seed: u64,
    stream_index: u64,
}

/// Opens substream `index` of the family keyed by `master_seed`.
pub fn substream(master_seed: u64, index: u64) -> RngStream {
    let mut state = master_seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    RngStream {
        rng,
        master_seed,
        stream_index: index,
    }
}

impl RngStream {
    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// Independent stream keyed by this stream's `(master_seed, stream_index)`
    /// and `k`. Depends only on the key, never on how far this stream has
    /// advanced.
    pub fn child(&self, k: u64) -> RngStream {
        substream(derive_seed(self.master_seed, self.stream_index), k)
    }

    /// Uniform on [0, 1) with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * TWO_POW_NEG_53
    }

    /// Uniform on the open interval (0, 1); safe to feed into logs and quantiles.
    pub fn open_uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * TWO_POW_NEG_53
    }

    /// Standard normal variate by inversion of one open uniform.
    pub fn standard_normal(&mut self) -> f64 {
        super::special::normal_quantile(self.open_uniform())
    }

    /// Unit-rate exponential variate by inversion.
    pub fn exponential(&mut self) -> f64 {
        -self.open_uniform().ln()
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}
