//! One frame end to end: placement, payloads, channels, slot-by-slot
//! synthesis (honoring ACKs), slot initialization and the SIC loop.
//!
//! Every random quantity comes from its own stream of the frame key, so
//! several receivers can be run on the same realization. Slots whose
//! occupancy is identical across receivers are synthesized once and the
//! pilot-domain cache is cloned.

use alloc::vec::Vec;

use rand::Rng;

use crate::channel::{draw_channel, synthesize_slot, Coherence, NoiseSpec, SlotSignal, SlotTx};
use crate::error::Result;
use crate::mac::{place, FrameAllocation, FrameConfig, Protocol};
use crate::receiver::{
    Counters, FrameView, Receiver, ReceiverConfig, ReceiverMode, SlotCache, Tracer, UserTruth,
};
use crate::rng::{Domain, FrameStreams};
use crate::signal::{modulate, CodeSpec, Constellation, PilotBook};
use crate::C64;

/// Physical-layer parameters shared by every slot.
#[derive(Debug, Clone, PartialEq)]
pub struct PhyConfig {
    pub antennas: usize,
    pub noise: NoiseSpec,
    pub code: CodeSpec,
    pub constellation: Constellation,
}

impl PhyConfig {
    pub fn payload_symbols(&self) -> usize {
        self.code.symbols(self.constellation.bits_per_symbol())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameSpec {
    pub mac: FrameConfig,
    pub phy: PhyConfig,
}

impl FrameSpec {
    pub fn validate(&self) -> Result<()> {
        self.mac.validate()?;
        PilotBook::new(self.mac.n_pilots)?;
        if self.phy.antennas == 0 {
            return Err(crate::error::invalid("antennas must be >= 1"));
        }
        Ok(())
    }

    pub fn receiver_config(&self, mode: ReceiverMode) -> ReceiverConfig {
        ReceiverConfig {
            mode,
            code: self.phy.code,
            constellation: self.phy.constellation.clone(),
            antennas: self.phy.antennas,
            coherence: self.mac.coherence,
        }
    }
}

/// Stream index used for a user's channel when it is shared by all replicas.
const SHARED_CHANNEL_SLOT: usize = (1 << 24) - 1;

/// Random content of a frame before any ACK is applied.
#[derive(Debug, Clone)]
pub struct FrameRealization {
    pub alloc: FrameAllocation,
    pub users: Vec<UserTruth>,
    pilots: Vec<Vec<C64>>,
    streams: FrameStreams,
}

impl FrameRealization {
    pub fn draw(spec: &FrameSpec, streams: FrameStreams) -> Result<Self> {
        spec.validate()?;
        let alloc = place(&spec.mac, &mut streams.stream(Domain::Allocation, 0))?;
        let book = PilotBook::new(spec.mac.n_pilots)?;
        let c = &spec.phy.constellation;
        let code = &spec.phy.code;
        let padded = code.padded_len(c.bits_per_symbol());
        let users = alloc
            .users()
            .iter()
            .enumerate()
            .map(|(u, placement)| {
                let mut rng = streams.stream(Domain::Payload, u as u64);
                let mut bits: Vec<u8> = (0..code.n).map(|_| rng.random_range(0..2u8)).collect();
                let symbols = {
                    bits.resize(padded, 0);
                    let s = modulate(&bits, c)?;
                    bits.truncate(code.n);
                    s
                };
                let channels = match spec.mac.coherence {
                    Coherence::PerUser => {
                        let mut rng = streams.user_slot(Domain::Channel, u, SHARED_CHANNEL_SLOT);
                        alloc::vec![draw_channel(spec.phy.antennas, &mut rng)]
                    }
                    Coherence::PerSlot => placement
                        .replicas
                        .iter()
                        .map(|r| {
                            let mut rng = streams.user_slot(Domain::Channel, u, r.slot);
                            draw_channel(spec.phy.antennas, &mut rng)
                        })
                        .collect(),
                };
                Ok(UserTruth {
                    codeword: bits,
                    symbols,
                    channels,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            alloc,
            users,
            pilots: (0..book.len()).map(|j| book.sequence(j)).collect(),
            streams,
        })
    }

    /// Received signal of `slot` given the replicas still transmitted in
    /// `alloc`. Noise depends only on the slot.
    pub fn synthesize(
        &self,
        spec: &FrameSpec,
        alloc: &FrameAllocation,
        slot: usize,
    ) -> Result<SlotSignal> {
        let tx: Vec<SlotTx<'_>> = alloc
            .slot_users(slot)
            .map(|(u, ri)| SlotTx {
                channel: self.users[u].channel(ri),
                pilot: &self.pilots[alloc.user(u).replicas[ri].pilot],
                payload: &self.users[u].symbols,
            })
            .collect();
        let mut rng = self.streams.stream(Domain::Noise, slot as u64);
        synthesize_slot(
            spec.phy.antennas,
            spec.mac.n_pilots,
            spec.phy.payload_symbols(),
            &tx,
            spec.phy.noise,
            &mut rng,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameOutcome {
    pub mode: ReceiverMode,
    pub decoded: Vec<bool>,
    pub counters: Counters,
    pub transmitted_replicas: usize,
}

impl FrameOutcome {
    pub fn n_users(&self) -> usize {
        self.decoded.len()
    }

    pub fn n_decoded(&self) -> usize {
        self.decoded.iter().filter(|d| **d).count()
    }

    pub fn n_lost(&self) -> usize {
        self.n_users() - self.n_decoded()
    }
}

/// Runs every mode in `modes` on the same realization of frame `streams`.
pub fn simulate_frame_modes(
    spec: &FrameSpec,
    modes: &[ReceiverMode],
    frame: u64,
    streams: FrameStreams,
) -> Result<Vec<FrameOutcome>> {
    let real = FrameRealization::draw(spec, streams)?;
    let mut tracers: Vec<()> = alloc::vec![(); modes.len()];
    let mut refs: Vec<&mut dyn Tracer> = tracers.iter_mut().map(|t| t as &mut dyn Tracer).collect();
    run_modes(spec, &real, modes, frame, &mut refs)
}

/// Runs a single receiver mode, reporting events to `tracer`.
pub fn simulate_frame(
    spec: &FrameSpec,
    mode: ReceiverMode,
    frame: u64,
    streams: FrameStreams,
    tracer: &mut dyn Tracer,
) -> Result<FrameOutcome> {
    let real = FrameRealization::draw(spec, streams)?;
    let mut out = run_modes(spec, &real, &[mode], frame, &mut [tracer])?;
    Ok(out.pop().expect("one mode"))
}

/// Runs the receivers of `modes` slot by slot over `real`.
pub fn run_modes(
    spec: &FrameSpec,
    real: &FrameRealization,
    modes: &[ReceiverMode],
    frame: u64,
    tracers: &mut [&mut dyn Tracer],
) -> Result<Vec<FrameOutcome>> {
    assert_eq!(modes.len(), tracers.len(), "one tracer per mode");
    let mut allocs: Vec<FrameAllocation> = modes.iter().map(|_| real.alloc.clone()).collect();
    let mut receivers: Vec<Receiver> = modes
        .iter()
        .map(|&m| Receiver::new(spec.receiver_config(m), frame, &real.alloc))
        .collect();
    for slot in 0..spec.mac.n_slots {
        // receivers with the same occupancy in this slot share one cache
        let mut groups: Vec<(Vec<(usize, usize)>, SlotCache)> = Vec::new();
        for (i, rx) in receivers.iter_mut().enumerate() {
            let occ: Vec<(usize, usize)> = allocs[i].slot_users(slot).collect();
            let cache = match groups.iter().find(|(o, _)| *o == occ) {
                Some((_, c)) => c.clone(),
                None => {
                    let c = SlotCache::new(&real.synthesize(spec, &allocs[i], slot)?);
                    groups.push((occ, c.clone()));
                    c
                }
            };
            let view = FrameView {
                alloc: &allocs[i],
                users: &real.users,
            };
            let decoded = rx.process_slot(view, slot, cache, &mut *tracers[i])?;
            if spec.mac.protocol == Protocol::ScAck {
                for u in decoded {
                    allocs[i].apply_ack(Protocol::ScAck, u, slot)?;
                }
            }
        }
    }
    receivers
        .iter_mut()
        .zip(allocs.iter())
        .zip(tracers.iter_mut())
        .map(|((rx, alloc), tracer)| {
            let view = FrameView {
                alloc,
                users: &real.users,
            };
            rx.run_sic(view, &mut **tracer)?;
            Ok(FrameOutcome {
                mode: rx.mode(),
                decoded: rx.decoded_mask(),
                counters: *rx.counters(),
                transmitted_replicas: alloc.transmitted_replicas(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logical::{peel_with_sic, ResourceGraph};
    use crate::receiver::{Schedule, SicAlgorithm};
    use crate::rng::Streams;

    fn small_spec(k: usize, protocol: Protocol, coherence: Coherence, noise: f64) -> FrameSpec {
        FrameSpec {
            mac: FrameConfig {
                n_slots: 6,
                n_pilots: 8,
                repetitions: 2,
                k_active: k,
                protocol,
                coherence,
            },
            phy: PhyConfig {
                antennas: 32,
                noise: NoiseSpec::new(noise).unwrap(),
                code: CodeSpec::new(63, 45, 3, 5).unwrap(),
                constellation: Constellation::qpsk(),
            },
        }
    }

    const ALL: [ReceiverMode; 5] = [
        ReceiverMode::new(SicAlgorithm::Chb, Schedule::Plain),
        ReceiverMode::new(SicAlgorithm::Chb, Schedule::Instantaneous),
        ReceiverMode::new(SicAlgorithm::Pab, Schedule::Plain),
        ReceiverMode::new(SicAlgorithm::Pab, Schedule::Instantaneous),
        ReceiverMode::new(SicAlgorithm::Prce, Schedule::Plain),
    ];

    #[test]
    fn paired_run_equals_separate_runs() {
        let spec = small_spec(20, Protocol::Baseline, Coherence::PerSlot, 0.1);
        let streams = Streams::new(3);
        let paired = simulate_frame_modes(&spec, &ALL, 4, streams.frame(4)).unwrap();
        for (mode, p) in ALL.iter().zip(&paired) {
            let single = simulate_frame(&spec, *mode, 4, streams.frame(4), &mut ()).unwrap();
            assert_eq!(&single, p);
        }
    }

    #[test]
    fn noiseless_prce_reaches_logical_bound_without_collisions() {
        // with M large relative to the load and no noise, PRCE decodes
        // exactly the peeling set whenever every singleton decodes
        let spec = small_spec(6, Protocol::Baseline, Coherence::PerSlot, 0.0);
        let streams = Streams::new(10);
        for f in 0..30 {
            let real = FrameRealization::draw(&spec, streams.frame(f)).unwrap();
            let logical = peel_with_sic(&ResourceGraph::from_allocation(&real.alloc)).decoded;
            let mode = ReceiverMode::new(SicAlgorithm::Prce, Schedule::Plain);
            let out = run_modes(&spec, &real, &[mode], f, &mut [&mut ()]).unwrap();
            for (u, (&l, &d)) in logical.iter().zip(&out[0].decoded).enumerate() {
                assert!(
                    !l || d,
                    "frame {f} user {u}: logical decodes, PRCE does not"
                );
            }
        }
    }

    #[test]
    fn ack_suppresses_replicas() {
        let spec = small_spec(4, Protocol::ScAck, Coherence::PerUser, 0.01);
        let streams = Streams::new(2);
        let mut any_suppressed = false;
        for f in 0..20 {
            let out = simulate_frame_modes(&spec, &ALL, f, streams.frame(f)).unwrap();
            for o in &out {
                assert!(o.transmitted_replicas <= 4 * 2);
                any_suppressed |= o.transmitted_replicas < 8;
            }
        }
        assert!(any_suppressed);
    }

    #[test]
    fn decoded_users_are_accounted_once() {
        let spec = small_spec(30, Protocol::Baseline, Coherence::PerSlot, 0.5);
        let streams = Streams::new(12);
        for f in 0..5 {
            for o in simulate_frame_modes(&spec, &ALL, f, streams.frame(f)).unwrap() {
                assert_eq!(o.counters.decodes() as usize, o.n_decoded());
                assert!(o.counters.buffer_pops as usize <= o.n_users());
                assert_eq!(o.n_decoded() + o.n_lost(), 30);
            }
        }
    }
}
