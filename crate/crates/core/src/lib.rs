//! Signal processing, receivers and analytic models for grant-free coded
//! slotted ALOHA over a massive-MIMO base station.
//!
//! The crate is `no_std` and only needs `alloc`. Everything in here is a pure
//! function of its inputs plus an explicitly supplied random stream, so frames
//! can be simulated on any number of workers with reproducible results.
//!
//! Module map:
//!
//! - [`signal`]: Hadamard pilots, Gray-mapped square QAM, bounded-distance
//!   decoding oracle.
//! - [`channel`]: block Rayleigh fading and per-slot signal synthesis.
//! - [`mac`]: replica placement (uniform and spatially coupled) and ACK
//!   suppression.
//! - [`receiver`]: pilot/payload channel estimation, MRC, the CHB and PAB
//!   cancellation algorithms, PRCE, instantaneous cancellation and the buffer
//!   driven SIC loop.
//! - [`analytics`]: closed-form interference and failure models.
//! - [`logical`]: collision-channel benchmarks (peeling and no-SIC).
//! - [`frame`]: one complete frame, from allocation to decoded users.
//! - [`experiment`]: single-slot experiments used to validate the analytics.
//! - [`fixtures`]: small hand-built scenarios with known outcomes.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analytics;
pub mod channel;
pub mod error;
pub mod experiment;
pub mod fixtures;
pub mod frame;
pub mod linalg;
pub mod logical;
pub mod mac;
pub mod receiver;
pub mod rng;
pub mod signal;
pub mod stats;

pub use error::{Error, Result};
pub use linalg::{CMatrix, C64};
