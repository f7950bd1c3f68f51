//! Counter-based random stream derivation.
//!
//! A campaign has one master seed. Each frame gets its own ChaCha key derived
//! from `(master, frame)`, and inside a frame every consumer (allocation,
//! payload of user `k`, channel of user `k` in slot `s`, noise of slot `s`)
//! reads from its own ChaCha stream id. Results therefore depend only on the
//! seed and the frame index, never on worker count or execution order, and
//! two receivers fed the same frame index see the same realization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::C64;

pub type StreamRng = ChaCha8Rng;

/// Consumer tag folded into the stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Domain {
    Allocation = 1,
    Payload = 2,
    Channel = 3,
    Noise = 4,
    Trial = 5,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Streams {
    master: u64,
}

impl Streams {
    pub fn new(master: u64) -> Self {
        Self { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    pub fn frame(&self, frame: u64) -> FrameStreams {
        let mut state = self.master ^ frame.wrapping_mul(0xA076_1D64_78BD_642F);
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        FrameStreams { key }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameStreams {
    key: [u8; 32],
}

impl FrameStreams {
    /// Independent stream for `domain`; `index` must fit in 56 bits.
    pub fn stream(&self, domain: Domain, index: u64) -> StreamRng {
        debug_assert!(index < 1 << 56);
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(((domain as u64) << 56) | index);
        rng
    }

    /// Stream for a per-(user, slot) quantity.
    pub fn user_slot(&self, domain: Domain, user: usize, slot: usize) -> StreamRng {
        self.stream(domain, ((user as u64) << 24) | slot as u64)
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One circularly symmetric complex Gaussian sample with total variance
/// `var`, built from two independent real Gaussians of variance `var / 2`.
#[inline]
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> C64 {
    let s = libm::sqrt(var / 2.0);
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(s * re, s * im)
}

pub fn fill_complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64, out: &mut [f64]) {
    let s = libm::sqrt(var / 2.0);
    for v in out.iter_mut() {
        let g: f64 = rng.sample(StandardNormal);
        *v = s * g;
    }
}
