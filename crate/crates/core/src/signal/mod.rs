//! Deterministic signal primitives shared by the transmitter and receiver.

mod code;
mod pilot;
mod qam;

pub use code::{bounded_distance_decode, hamming_distance, CodeSpec, DecodeOutcome};
pub use pilot::PilotBook;
pub use qam::{demap_hard, modulate, Constellation};

/// Packed bit sequence, one bit per byte (`0` or `1`).
pub type Bits = alloc::vec::Vec<u8>;
