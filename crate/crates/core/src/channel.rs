//! Block Rayleigh fading and per-slot received signal synthesis.
//!
//! In a slot with active set `A`, the base station observes
//!
//! ```text
//! P = Σ_{k∈A} h_k s(k) + Z_p      (M × N_P, pilot part)
//! Y = Σ_{k∈A} h_k x(k) + Z        (M × N_D, payload part)
//! ```
//!
//! with `h_k ~ CN(0, I_M)` and noise entries `CN(0, σ_n²)`.

use alloc::vec::Vec;

use rand::Rng;

use crate::error::{invalid, Result};
use crate::linalg::CMatrix;
use crate::rng::{complex_gaussian, fill_complex_gaussian};
use crate::C64;

/// Per-user channel vector across the `M` base station antennas.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelVector(pub Vec<C64>);

impl ChannelVector {
    pub fn antennas(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    pub fn norm_sq(&self) -> f64 {
        crate::linalg::norm_sq(&self.0)
    }
}

/// Circularly symmetric complex Gaussian noise with variance `σ_n²` per
/// complex sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    variance: f64,
}

impl NoiseSpec {
    pub fn new(variance: f64) -> Result<Self> {
        if !(variance >= 0.0 && variance.is_finite()) {
            return Err(invalid(alloc::format!(
                "noise variance must be finite and >= 0, got {variance}"
            )));
        }
        Ok(Self { variance })
    }

    pub fn noiseless() -> Self {
        Self { variance: 0.0 }
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }
}

/// Whether a user keeps one channel for all of its replicas or draws a fresh
/// one in every slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Coherence {
    /// `T_c = T_s`: independent draw per slot.
    PerSlot,
    /// `T_c = r·T_s`: one draw shared by all replicas of a user.
    PerUser,
}

/// Draws `h ~ CN(0, I_M)` from `rng`.
pub fn draw_channel<R: Rng + ?Sized>(antennas: usize, rng: &mut R) -> ChannelVector {
    ChannelVector((0..antennas).map(|_| complex_gaussian(rng, 1.0)).collect())
}

/// Received pilot and payload blocks of one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotSignal {
    pub p: CMatrix,
    pub y: CMatrix,
}

impl SlotSignal {
    pub fn zeros(antennas: usize, n_pilots: usize, n_payload: usize) -> Self {
        Self {
            p: CMatrix::zeros(antennas, n_pilots),
            y: CMatrix::zeros(antennas, n_payload),
        }
    }

    pub fn antennas(&self) -> usize {
        self.p.rows()
    }

    pub fn pilot_len(&self) -> usize {
        self.p.cols()
    }

    pub fn payload_len(&self) -> usize {
        self.y.cols()
    }

    pub fn is_finite(&self) -> bool {
        self.p.is_finite() && self.y.is_finite()
    }

    /// `self += h s` and `self += h x`.
    pub fn add_user(&mut self, h: &[C64], pilot: &[C64], payload: &[C64]) {
        self.p.add_outer(h, pilot);
        self.y.add_outer(h, payload);
    }

    pub fn energy(&self) -> f64 {
        self.p.energy() + self.y.energy()
    }
}

/// One replica as seen by the channel.
#[derive(Debug, Clone, Copy)]
pub struct SlotTx<'a> {
    pub channel: &'a [C64],
    pub pilot: &'a [C64],
    pub payload: &'a [C64],
}

/// Synthesizes `[P, Y]` for one slot.
///
/// Noise is drawn only when `σ_n² > 0`, so a noiseless call leaves `rng`
/// untouched.
pub fn synthesize_slot<R: Rng + ?Sized>(
    antennas: usize,
    n_pilots: usize,
    n_payload: usize,
    active: &[SlotTx<'_>],
    noise: NoiseSpec,
    rng: &mut R,
) -> Result<SlotSignal> {
    for (i, tx) in active.iter().enumerate() {
        if tx.channel.len() != antennas
            || tx.pilot.len() != n_pilots
            || tx.payload.len() != n_payload
        {
            return Err(invalid(alloc::format!(
                "replica {i}: channel/pilot/payload lengths {}/{}/{} do not match {antennas}/{n_pilots}/{n_payload}",
                tx.channel.len(),
                tx.pilot.len(),
                tx.payload.len()
            )));
        }
    }
    let mut slot = SlotSignal::zeros(antennas, n_pilots, n_payload);
    if noise.variance > 0.0 {
        for m in [&mut slot.p, &mut slot.y] {
            let (re, im) = m.planes_mut();
            fill_complex_gaussian(rng, noise.variance, re);
            fill_complex_gaussian(rng, noise.variance, im);
        }
    }
    for tx in active {
        slot.add_user(tx.channel, tx.pilot, tx.payload);
    }
    Ok(slot)
}
