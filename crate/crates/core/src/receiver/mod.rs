//! Base-station processing of one frame: per-slot initialization (channel
//! estimation on every pilot, MRC, decode attempts, optionally instantaneous
//! cancellation) followed by the buffered SIC loop.
//!
//! Subtraction rules per algorithm:
//!
//! * `Chb`: during the SIC loop only `f_j`, `g_j` are kept per pilot and a
//!   decoded user is removed with `f_j ← f_j − M x`, `g_j ← g_j − M`; only the
//!   touched pilot is retried. Instantaneous cancellation inside a slot uses
//!   the pilot estimate `φ_j` on the full slot signal, since the accumulator
//!   update alone would leave every other pilot of the slot unchanged.
//! * `Pab`: the generator slot is cleaned with `φ_j`, other slots with the
//!   payload-based estimate `Y xᴴ/‖x‖²` (or `φ_j` again when the user keeps
//!   its channel across replicas); every pilot of the touched slot is
//!   retried.
//! * `Prce`: like `Pab` but every subtraction uses the true channel.
//!
//! Pilots on which a user has already been found, and pilots whose `g_j`
//! dropped to `10⁻⁶ M` or below, are never retried.

mod cache;
pub mod ops;
mod trace;

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

pub use cache::{MrcBank, SlotCache};
pub use ops::{
    attempt_decode, chb_subtract, estimate_channel_payload, estimate_channel_pilot,
    exhaustion_threshold, mrc_estimate, pab_subtract_generator, pab_subtract_replica,
    MrcAccumulators,
};
pub use trace::{EventKind, Phase, TraceEvent, Tracer};

use crate::channel::{ChannelVector, Coherence};
use crate::error::{invalid, Result};
use crate::mac::FrameAllocation;
use crate::signal::{Bits, CodeSpec, Constellation};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SicAlgorithm {
    Chb,
    Pab,
    Prce,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Schedule {
    Plain,
    Instantaneous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ReceiverMode {
    pub sic: SicAlgorithm,
    pub schedule: Schedule,
}

impl ReceiverMode {
    pub const fn new(sic: SicAlgorithm, schedule: Schedule) -> Self {
        Self { sic, schedule }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverConfig {
    pub mode: ReceiverMode,
    pub code: CodeSpec,
    pub constellation: Constellation,
    pub antennas: usize,
    pub coherence: Coherence,
}

/// What the genie decoder and the ideal-cancellation benchmark know about a
/// user: its codeword, its symbols and its true channel per replica.
#[derive(Debug, Clone, PartialEq)]
pub struct UserTruth {
    pub codeword: Bits,
    pub symbols: Vec<C64>,
    /// One vector per replica, or a single vector shared by all replicas.
    pub channels: Vec<ChannelVector>,
}

impl UserTruth {
    pub fn channel(&self, replica: usize) -> &[C64] {
        let i = if self.channels.len() == 1 { 0 } else { replica };
        &self.channels[i].0
    }
}

/// Read-only frame description handed to the receiver.
#[derive(Debug, Clone, Copy)]
pub struct FrameView<'a> {
    pub alloc: &'a FrameAllocation,
    pub users: &'a [UserTruth],
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    pub init_attempts: u64,
    pub sic_attempts: u64,
    /// Subtractions done during slot initialization (instantaneous mode).
    pub init_subtractions: u64,
    pub sic_subtractions: u64,
    pub init_decodes: u64,
    pub sic_decodes: u64,
    pub buffer_pops: u64,
}

impl Counters {
    pub fn attempts(&self) -> u64 {
        self.init_attempts + self.sic_attempts
    }

    pub fn subtractions(&self) -> u64 {
        self.init_subtractions + self.sic_subtractions
    }

    pub fn decodes(&self) -> u64 {
        self.init_decodes + self.sic_decodes
    }

    pub fn merge(&mut self, o: &Counters) {
        self.init_attempts += o.init_attempts;
        self.sic_attempts += o.sic_attempts;
        self.init_subtractions += o.init_subtractions;
        self.sic_subtractions += o.sic_subtractions;
        self.init_decodes += o.init_decodes;
        self.sic_decodes += o.sic_decodes;
        self.buffer_pops += o.buffer_pops;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodedPacket {
    pub user: usize,
    /// Generator slot and pilot.
    pub slot: usize,
    pub pilot: usize,
    pub phase: Phase,
    /// Pilot estimate at decode time, when the slot still had one.
    pub phi: Option<Vec<C64>>,
}

#[derive(Debug, Clone)]
enum SlotState {
    Pending,
    Full(SlotCache),
    Bank(MrcBank),
}

#[derive(Debug, Clone)]
pub struct Receiver {
    cfg: ReceiverConfig,
    frame: u64,
    n_slots: usize,
    n_pilots: usize,
    eps: f64,
    slots: Vec<SlotState>,
    found: Vec<bool>,
    status: Vec<Option<usize>>,
    packets: Vec<DecodedPacket>,
    buffer: VecDeque<usize>,
    subtracted: Vec<Vec<bool>>,
    counters: Counters,
    iteration: usize,
}

impl Receiver {
    pub fn new(cfg: ReceiverConfig, frame: u64, alloc: &FrameAllocation) -> Self {
        let (n_slots, n_pilots) = (alloc.n_slots(), alloc.n_pilots());
        Self {
            eps: exhaustion_threshold(cfg.antennas),
            cfg,
            frame,
            n_slots,
            n_pilots,
            slots: vec![SlotState::Pending; n_slots],
            found: vec![false; n_slots * n_pilots],
            status: vec![None; alloc.n_users()],
            packets: Vec::new(),
            buffer: VecDeque::new(),
            subtracted: alloc
                .users()
                .iter()
                .map(|u| vec![false; u.replicas.len()])
                .collect(),
            counters: Counters::default(),
            iteration: 0,
        }
    }

    pub fn mode(&self) -> ReceiverMode {
        self.cfg.mode
    }

    pub fn counters(&self) -> &Counters {
        &self.counters
    }

    pub fn packets(&self) -> &[DecodedPacket] {
        &self.packets
    }

    pub fn is_decoded(&self, user: usize) -> bool {
        self.status[user].is_some()
    }

    pub fn decoded_mask(&self) -> Vec<bool> {
        self.status.iter().map(Option::is_some).collect()
    }

    pub fn n_decoded(&self) -> usize {
        self.packets.len()
    }

    /// Initializes `slot` from its received signal and returns the users
    /// decoded in it, in decode order.
    pub fn process_slot<T: Tracer + ?Sized>(
        &mut self,
        view: FrameView<'_>,
        slot: usize,
        cache: SlotCache,
        tracer: &mut T,
    ) -> Result<Vec<usize>> {
        if slot >= self.n_slots || !matches!(self.slots[slot], SlotState::Pending) {
            return Err(invalid(alloc::format!(
                "slot {slot} is out of range or already processed"
            )));
        }
        if cache.n_pilots() != self.n_pilots || cache.antennas() != self.cfg.antennas {
            return Err(invalid(alloc::format!(
                "slot cache has {} pilots / {} antennas, receiver expects {} / {}",
                cache.n_pilots(),
                cache.antennas(),
                self.n_pilots,
                self.cfg.antennas
            )));
        }
        self.slots[slot] = SlotState::Full(cache);
        let first = self.packets.len();
        match self.cfg.mode.schedule {
            Schedule::Plain => {
                for p in 0..self.n_pilots {
                    self.try_decode(view, slot, p, Phase::Init, tracer);
                }
            }
            Schedule::Instantaneous => loop {
                let hit = (0..self.n_pilots)
                    .find_map(|p| self.try_decode(view, slot, p, Phase::Init, tracer));
                let Some(user) = hit else { break };
                let packet = self.status[user].expect("just decoded");
                let replica = view
                    .alloc
                    .user(user)
                    .replica_in_slot(slot)
                    .expect("decoded in this slot");
                self.subtract_replica(view, packet, replica, Phase::Init, tracer);
            },
        }
        if self.cfg.mode.sic == SicAlgorithm::Chb {
            let SlotState::Full(cache) =
                core::mem::replace(&mut self.slots[slot], SlotState::Pending)
            else {
                unreachable!()
            };
            self.slots[slot] = SlotState::Bank(cache.into_bank());
        }
        Ok(self.packets[first..].iter().map(|p| p.user).collect())
    }

    /// Runs the buffer loop until no decoded packet is left to cancel.
    pub fn run_sic<T: Tracer + ?Sized>(
        &mut self,
        view: FrameView<'_>,
        tracer: &mut T,
    ) -> Result<()> {
        if let Some(s) = self
            .slots
            .iter()
            .position(|s| matches!(s, SlotState::Pending))
        {
            return Err(invalid(alloc::format!("slot {s} was never processed")));
        }
        while let Some(packet) = self.buffer.pop_front() {
            self.iteration += 1;
            self.counters.buffer_pops += 1;
            let user = self.packets[packet].user;
            let placement = view.alloc.user(user);
            for (ri, rep) in placement.active_replicas() {
                if self.subtracted[user][ri] {
                    continue;
                }
                self.subtract_replica(view, packet, ri, Phase::Sic, tracer);
                match self.cfg.mode.sic {
                    SicAlgorithm::Chb => {
                        self.try_decode(view, rep.slot, rep.pilot, Phase::Sic, tracer);
                    }
                    SicAlgorithm::Pab | SicAlgorithm::Prce => {
                        for p in 0..self.n_pilots {
                            self.try_decode(view, rep.slot, p, Phase::Sic, tracer);
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn try_decode<T: Tracer + ?Sized>(
        &mut self,
        view: FrameView<'_>,
        slot: usize,
        pilot: usize,
        phase: Phase,
        tracer: &mut T,
    ) -> Option<usize> {
        let res = slot * self.n_pilots + pilot;
        if self.found[res] {
            return None;
        }
        let g = match &self.slots[slot] {
            SlotState::Full(c) => c.g(pilot),
            SlotState::Bank(b) => b.g(pilot),
            SlotState::Pending => return None,
        };
        if g <= self.eps {
            return None;
        }
        match phase {
            Phase::Init => self.counters.init_attempts += 1,
            Phase::Sic => self.counters.sic_attempts += 1,
        }
        let status = &self.status;
        let mut candidates = view
            .alloc
            .occupants(slot, pilot)
            .iter()
            .filter(|&&u| status[u].is_none())
            .map(|&u| (u, view.users[u].codeword.as_slice()))
            .peekable();
        candidates.peek()?;
        let f = match &self.slots[slot] {
            SlotState::Full(c) => c.f(pilot),
            SlotState::Bank(b) => b.f(pilot),
            SlotState::Pending => unreachable!(),
        };
        let x_hat: Vec<C64> = f.iter().map(|v| v / g).collect();
        let user = attempt_decode(&x_hat, candidates, &self.cfg.code, &self.cfg.constellation)?;
        let phi = match &self.slots[slot] {
            SlotState::Full(c) => Some(c.phi(pilot)),
            _ => None,
        };
        self.found[res] = true;
        self.status[user] = Some(self.packets.len());
        self.buffer.push_back(self.packets.len());
        self.packets.push(DecodedPacket {
            user,
            slot,
            pilot,
            phase,
            phi,
        });
        match phase {
            Phase::Init => self.counters.init_decodes += 1,
            Phase::Sic => self.counters.sic_decodes += 1,
        }
        self.trace(tracer, slot, pilot, user, EventKind::Decode, phase);
        Some(user)
    }

    fn subtract_replica<T: Tracer + ?Sized>(
        &mut self,
        view: FrameView<'_>,
        packet: usize,
        replica: usize,
        phase: Phase,
        tracer: &mut T,
    ) {
        let pk = &self.packets[packet];
        let user = pk.user;
        let rep = view.alloc.user(user).replicas[replica];
        let truth = &view.users[user];
        let x = &truth.symbols;
        match &mut self.slots[rep.slot] {
            SlotState::Full(cache) => {
                let owned;
                let a: &[C64] = match self.cfg.mode.sic {
                    SicAlgorithm::Prce => truth.channel(replica),
                    SicAlgorithm::Chb | SicAlgorithm::Pab => match &pk.phi {
                        Some(phi)
                            if rep.slot == pk.slot || self.cfg.coherence == Coherence::PerUser =>
                        {
                            phi
                        }
                        _ => {
                            owned = cache.estimate_payload_channel(x);
                            &owned
                        }
                    },
                };
                cache.subtract(rep.pilot, a, x);
            }
            SlotState::Bank(bank) => bank.chb_subtract(rep.pilot, x, self.cfg.antennas),
            SlotState::Pending => unreachable!("subtraction in an unprocessed slot"),
        }
        self.subtracted[user][replica] = true;
        match phase {
            Phase::Init => self.counters.init_subtractions += 1,
            Phase::Sic => self.counters.sic_subtractions += 1,
        }
        self.trace(
            tracer,
            rep.slot,
            rep.pilot,
            user,
            EventKind::Subtract,
            phase,
        );
    }

    fn trace<T: Tracer + ?Sized>(
        &self,
        tracer: &mut T,
        slot: usize,
        pilot: usize,
        user: usize,
        kind: EventKind,
        phase: Phase,
    ) {
        tracer.event(&TraceEvent {
            frame: self.frame,
            slot,
            pilot,
            user,
            kind,
            phase,
            iteration: if phase == Phase::Init {
                0
            } else {
                self.iteration
            },
        });
    }
}
