//! Hand-built scenarios with known outcomes.

use alloc::vec;
use alloc::vec::Vec;

use crate::channel::{ChannelVector, Coherence, SlotSignal};
use crate::error::Result;
use crate::mac::{FrameAllocation, Replica};
use crate::receiver::{
    FrameView, Receiver, ReceiverConfig, ReceiverMode, SlotCache, Tracer, UserTruth,
};
use crate::signal::{modulate, CodeSpec, Constellation, PilotBook};
use crate::C64;

/// Eight users on eight slots with two pilots each, one line per user
/// (1-based ids, slots and pilots).
///
/// Users 2, 4, 6 and 8 hold a resource nobody else uses: 2 on (4,1), 6 on
/// (5,1), 8 on (5,2) and (7,2), 4 on (6,1). Once they are removed, user 7 is
/// alone on (2,1) and user 5 alone on (4,2). Removing 7 and 5 frees (3,1)
/// for user 1 and (3,2) for user 3. Resource (8,1) carries 1, 3 and 4 and is
/// never a singleton before the last wave.
pub const PEELING_EXAMPLE: &str = "\
# slots=8 pilots=2
1: (3,1) (8,1)
2: (2,1) (4,1)
3: (3,2) (8,1)
4: (6,1) (8,1)
5: (3,2) (4,2)
6: (4,2) (5,1)
7: (2,1) (3,1)
8: (5,2) (7,2)
";

/// A single noiseless slot whose decoding depends on the schedule.
#[derive(Debug, Clone)]
pub struct SlotScenario {
    pub alloc: FrameAllocation,
    pub users: Vec<UserTruth>,
    pub signal: SlotSignal,
    pub config: ReceiverConfig,
}

impl SlotScenario {
    /// Runs the slot with `mode` followed by the SIC loop.
    pub fn run<T: Tracer + ?Sized>(&self, mode: ReceiverMode, tracer: &mut T) -> Result<Receiver> {
        let cfg = ReceiverConfig {
            mode,
            ..self.config.clone()
        };
        let mut rx = Receiver::new(cfg, 0, &self.alloc);
        let view = FrameView {
            alloc: &self.alloc,
            users: &self.users,
        };
        rx.process_slot(view, 0, SlotCache::new(&self.signal), tracer)?;
        rx.run_sic(view, tracer)?;
        Ok(rx)
    }
}

/// Eight pilots, three antennas, three singletons on pilots 0, 1 and 6.
///
/// Channels: `h₀ = e₁ + 10e₂`, `h₁ = e₁`, `h₂ = e₁ + 10e₃`. Users 0 and 2
/// send the bitwise complement of user 1's codeword, so on pilot 1 the MRC
/// output is `x₁ − 2x₁ = −x₁` and every bit is wrong. On pilots 0 and 6 the
/// leakage `(x₁ + x₂)/101` or `(x₀ + x₁)/101` cancels exactly. User 1 becomes
/// decodable only after users 0 and 2 are removed from the slot itself.
/// Users are listed by pilot, so user `u` of the scenario is the singleton
/// on the `u`-th occupied pilot.
pub fn instantaneous_cancellation_slot() -> SlotScenario {
    const M: usize = 3;
    let code = CodeSpec::new(15, 11, 1, 0).expect("valid (15, 11) code");
    let c = Constellation::qpsk();
    let book = PilotBook::new(8).expect("power of two");

    let base: Vec<u8> = vec![1, 0, 1, 1, 0, 0, 1, 0, 1, 1, 1, 0, 0, 1, 0];
    let flipped: Vec<u8> = base.iter().map(|b| 1 - b).collect();
    let unit = |i: usize, scale: f64| {
        let mut h = vec![C64::new(0.0, 0.0); M];
        h[0] = C64::new(1.0, 0.0);
        if i > 0 {
            h[i] = C64::new(scale, 0.0);
        }
        ChannelVector(h)
    };
    let users: Vec<(usize, Vec<u8>, ChannelVector)> = vec![
        (0, flipped.clone(), unit(1, 10.0)),
        (1, base, unit(0, 0.0)),
        (6, flipped, unit(2, 10.0)),
    ];

    let padded = code.padded_len(c.bits_per_symbol());
    let mut signal = SlotSignal::zeros(M, 8, code.symbols(c.bits_per_symbol()));
    let mut truths = Vec::new();
    let mut placements = Vec::new();
    for (pilot, bits, h) in users {
        let mut padded_bits = bits.clone();
        padded_bits.resize(padded, 0);
        let symbols = modulate(&padded_bits, &c).expect("whole symbols");
        signal.add_user(h.as_slice(), &book.sequence(pilot), &symbols);
        placements.push(vec![Replica { slot: 0, pilot }]);
        truths.push(UserTruth {
            codeword: bits,
            symbols,
            channels: vec![h],
        });
    }
    let alloc = FrameAllocation::from_replicas(1, 8, placements).expect("valid placement");
    let config = ReceiverConfig {
        mode: ReceiverMode::new(
            crate::receiver::SicAlgorithm::Chb,
            crate::receiver::Schedule::Plain,
        ),
        code,
        constellation: c,
        antennas: M,
        coherence: Coherence::PerSlot,
    };
    SlotScenario {
        alloc,
        users: truths,
        signal,
        config,
    }
}
