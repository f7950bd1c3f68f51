//! Reference implementations of the per-slot operations on a full
//! [`SlotSignal`]. They recompute everything from `P` and `Y`; the receiver
//! itself uses the incremental [`SlotCache`](super::SlotCache), which the
//! tests check against these.

use alloc::vec::Vec;

use crate::channel::SlotSignal;
use crate::linalg::norm_sq;
use crate::signal::{demap_hard, hamming_distance, CodeSpec, Constellation};
use crate::C64;

/// Threshold on `g = ‖φ‖²` below which a pilot is treated as exhausted.
pub fn exhaustion_threshold(antennas: usize) -> f64 {
    1e-6 * antennas as f64
}

/// `f = φᴴ Y` and `g = ‖φ‖²` of one pilot.
#[derive(Debug, Clone, PartialEq)]
pub struct MrcAccumulators {
    pub f: Vec<C64>,
    pub g: f64,
}

impl MrcAccumulators {
    /// `x̂ = f / g`, or `None` when `g` is at or below `eps`.
    pub fn payload(&self, eps: f64) -> Option<Vec<C64>> {
        (self.g > eps).then(|| self.f.iter().map(|v| v / self.g).collect())
    }
}

/// `φ = P sᴴ / ‖s‖²`.
pub fn estimate_channel_pilot(slot: &SlotSignal, pilot: &[C64]) -> Vec<C64> {
    let e = norm_sq(pilot);
    slot.p
        .right_mul_conj(pilot)
        .into_iter()
        .map(|v| v / e)
        .collect()
}

pub fn mrc_estimate(phi: &[C64], slot: &SlotSignal) -> MrcAccumulators {
    MrcAccumulators {
        f: slot.y.left_mul_conj(phi),
        g: norm_sq(phi),
    }
}

/// Hard-demaps `x_hat`, drops the padding bits and returns the first
/// candidate whose codeword lies within `t` bit errors.
pub fn attempt_decode<'a>(
    x_hat: &[C64],
    candidates: impl IntoIterator<Item = (usize, &'a [u8])>,
    code: &CodeSpec,
    c: &Constellation,
) -> Option<usize> {
    let mut candidates = candidates.into_iter().peekable();
    candidates.peek()?;
    let bits = demap_hard(x_hat, c);
    let bits = &bits[..code.n];
    candidates
        .find(|(_, cw)| hamming_distance(bits, cw) <= code.t)
        .map(|(u, _)| u)
}

/// Channel-hardening update `f ← f − M x`, `g ← max(g − M, 0)`.
/// Returns `true` when the pilot is exhausted afterwards.
pub fn chb_subtract(acc: &mut MrcAccumulators, x: &[C64], antennas: usize) -> bool {
    let m = antennas as f64;
    for (f, x) in acc.f.iter_mut().zip(x) {
        *f -= x * m;
    }
    acc.g = (acc.g - m).max(0.0);
    acc.g <= exhaustion_threshold(antennas)
}

/// `P ← P − a s`, `Y ← Y − a x`.
pub fn subtract_user(slot: &mut SlotSignal, a: &[C64], pilot: &[C64], x: &[C64]) {
    slot.p.sub_outer(a, pilot);
    slot.y.sub_outer(a, x);
}

/// Subtraction in the slot where the packet was decoded, reusing its pilot
/// estimate `φ`.
pub fn pab_subtract_generator(slot: &mut SlotSignal, phi: &[C64], pilot: &[C64], x: &[C64]) {
    subtract_user(slot, phi, pilot, x);
}

/// `ĥ = Y xᴴ / ‖x‖²`.
pub fn estimate_channel_payload(slot: &SlotSignal, x: &[C64]) -> Vec<C64> {
    let e = norm_sq(x);
    slot.y
        .right_mul_conj(x)
        .into_iter()
        .map(|v| v / e)
        .collect()
}

pub fn pab_subtract_replica(slot: &mut SlotSignal, h_hat: &[C64], pilot: &[C64], x: &[C64]) {
    subtract_user(slot, h_hat, pilot, x);
}
