//! Monte Carlo experiments on a single slot, used to check the closed-form
//! models of [`analytics`](crate::analytics).
//!
//! The singleton experiment has two routes. [`chb_singleton_trial_full`]
//! synthesizes the whole slot and runs the receiver operations. The fast
//! route [`chb_singleton_trial`] only draws what the MRC output depends on:
//! conditioned on `φ`, the correlations `φᴴ h_m` of users on other pilots are
//! i.i.d. `CN(0, ‖φ‖²)` and the noise term `φᴴ Z` has i.i.d. entries of
//! variance `σ² ‖φ‖²`, so the result has exactly the same distribution.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::analytics::InterferenceScenario;
use crate::channel::{draw_channel, synthesize_slot, NoiseSpec, SlotTx};
use crate::error::Result;
use crate::linalg::norm_sq;
use crate::receiver::{
    chb_subtract, estimate_channel_payload, estimate_channel_pilot, exhaustion_threshold,
    mrc_estimate, pab_subtract_replica,
};
use crate::rng::complex_gaussian;
use crate::signal::{demap_hard, hamming_distance, modulate, CodeSpec, Constellation, PilotBook};
use crate::C64;

/// A singleton user on pilot 0 of a slot: `n_pilot_users - 1` co-pilot
/// users already decoded elsewhere and `n_slot_users - n_pilot_users` users
/// on other pilots.
#[derive(Debug, Clone, PartialEq)]
pub struct SingletonExperiment {
    pub scenario: InterferenceScenario,
    pub code: CodeSpec,
    pub constellation: Constellation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    pub bit_errors: usize,
    pub symbol_errors: usize,
    /// `g` fell to the exhaustion threshold; nothing was decoded.
    pub exhausted: bool,
}

impl TrialOutcome {
    pub fn failed(&self, code: &CodeSpec) -> bool {
        self.exhausted || self.bit_errors > code.t
    }

    /// Failure under a symbol-error count, as in the closed-form model.
    pub fn failed_symbols(&self, t: usize) -> bool {
        self.exhausted || self.symbol_errors > t
    }
}

struct Packet {
    bits: Vec<u8>,
    labels: Vec<usize>,
    symbols: Vec<C64>,
}

fn random_packet<R: Rng + ?Sized>(code: &CodeSpec, c: &Constellation, rng: &mut R) -> Packet {
    let mut bits: Vec<u8> = (0..code.n).map(|_| rng.random_range(0..2u8)).collect();
    bits.resize(code.padded_len(c.bits_per_symbol()), 0);
    let symbols = modulate(&bits, c).expect("padded length fits whole symbols");
    let labels = symbols.iter().map(|&z| c.nearest(z)).collect();
    bits.truncate(code.n);
    Packet {
        bits,
        labels,
        symbols,
    }
}

fn random_symbols<R: Rng + ?Sized>(n: usize, c: &Constellation, rng: &mut R) -> Vec<C64> {
    (0..n)
        .map(|_| c.points()[rng.random_range(0..c.order())])
        .collect()
}

fn score(
    x_hat: &[C64],
    g: f64,
    eps: f64,
    truth: &Packet,
    code: &CodeSpec,
    c: &Constellation,
) -> TrialOutcome {
    if g <= eps {
        return TrialOutcome {
            bit_errors: code.n,
            symbol_errors: truth.labels.len(),
            exhausted: true,
        };
    }
    let bits = demap_hard(x_hat, c);
    TrialOutcome {
        bit_errors: hamming_distance(&bits[..code.n], &truth.bits),
        symbol_errors: x_hat
            .iter()
            .zip(&truth.labels)
            .filter(|(z, l)| c.nearest(**z) != **l)
            .count(),
        exhausted: false,
    }
}

impl SingletonExperiment {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        PilotBook::new(self.scenario.n_pilots)?;
        Ok(())
    }

    fn payload_len(&self) -> usize {
        self.code.symbols(self.constellation.bits_per_symbol())
    }
}

/// Fast route of the channel-hardening singleton experiment.
pub fn chb_singleton_trial<R: Rng + ?Sized>(e: &SingletonExperiment, rng: &mut R) -> TrialOutcome {
    let s = &e.scenario;
    let (m, n_d) = (s.antennas, e.payload_len());
    let c = &e.constellation;
    let me = random_packet(&e.code, c, rng);
    let co: Vec<(Vec<C64>, Vec<C64>)> = (1..s.n_pilot_users)
        .map(|_| (draw_channel(m, rng).0, random_symbols(n_d, c, rng)))
        .collect();
    let h0 = draw_channel(m, rng).0;
    let mut phi = h0.clone();
    for (h, _) in &co {
        for (p, v) in phi.iter_mut().zip(h) {
            *p += v;
        }
    }
    let pilot_noise = s.noise_var / s.n_pilots as f64;
    if pilot_noise > 0.0 {
        for p in phi.iter_mut() {
            *p += complex_gaussian(rng, pilot_noise);
        }
    }
    let g0 = norm_sq(&phi);
    let dot = |h: &[C64]| -> C64 { phi.iter().zip(h).map(|(a, b)| a.conj() * b).sum() };
    let mut f: Vec<C64> = {
        let c0 = dot(&h0);
        me.symbols.iter().map(|x| c0 * x).collect()
    };
    for (h, x) in &co {
        let ck = dot(h);
        for (f, x) in f.iter_mut().zip(x) {
            *f += ck * x;
        }
    }
    for _ in s.n_pilot_users..s.n_slot_users {
        let ck = complex_gaussian(rng, g0);
        for f in f.iter_mut() {
            *f += ck * c.points()[rng.random_range(0..c.order())];
        }
    }
    if s.noise_var > 0.0 {
        for f in f.iter_mut() {
            *f += complex_gaussian(rng, s.noise_var * g0);
        }
    }
    let mut acc = crate::receiver::MrcAccumulators { f, g: g0 };
    for (_, x) in &co {
        chb_subtract(&mut acc, x, m);
    }
    let x_hat: Vec<C64> = acc
        .f
        .iter()
        .map(|v| v / acc.g.max(f64::MIN_POSITIVE))
        .collect();
    score(&x_hat, acc.g, exhaustion_threshold(m), &me, &e.code, c)
}

/// Full route: synthesize the slot, estimate, combine, subtract.
pub fn chb_singleton_trial_full<R: Rng + ?Sized>(
    e: &SingletonExperiment,
    rng: &mut R,
) -> TrialOutcome {
    let s = &e.scenario;
    let (m, n_d, n_p) = (s.antennas, e.payload_len(), s.n_pilots);
    let c = &e.constellation;
    let book = PilotBook::new(n_p).expect("validated pilot count");
    let me = random_packet(&e.code, c, rng);
    let others: Vec<(Vec<C64>, Vec<C64>, usize)> = (1..s.n_slot_users)
        .map(|k| {
            let pilot = if k < s.n_pilot_users {
                0
            } else {
                rng.random_range(1..n_p)
            };
            (draw_channel(m, rng).0, random_symbols(n_d, c, rng), pilot)
        })
        .collect();
    let h0 = draw_channel(m, rng).0;
    let seqs: Vec<Vec<C64>> = (0..n_p).map(|j| book.sequence(j)).collect();
    let mut tx = vec![SlotTx {
        channel: &h0,
        pilot: &seqs[0],
        payload: &me.symbols,
    }];
    tx.extend(others.iter().map(|(h, x, j)| SlotTx {
        channel: h,
        pilot: &seqs[*j],
        payload: x,
    }));
    let noise = NoiseSpec::new(s.noise_var).expect("validated noise");
    let slot = synthesize_slot(m, n_p, n_d, &tx, noise, rng).expect("consistent dimensions");
    let phi = estimate_channel_pilot(&slot, &seqs[0]);
    let mut acc = mrc_estimate(&phi, &slot);
    for (_, x, _) in others.iter().take(s.n_pilot_users - 1) {
        chb_subtract(&mut acc, x, m);
    }
    let x_hat: Vec<C64> = acc
        .f
        .iter()
        .map(|v| v / acc.g.max(f64::MIN_POSITIVE))
        .collect();
    score(&x_hat, acc.g, exhaustion_threshold(m), &me, &e.code, c)
}

/// Singleton with one co-pilot interferer, both SIC variants on the same
/// slot. Before the singleton is combined, `n_subtracted` of the users on
/// other pilots and then the co-pilot user are removed with payload-based
/// estimates only (no pilot-based subtraction). Returns `(chb, pab)`.
pub fn pab_vs_chb_trial<R: Rng + ?Sized>(
    e: &SingletonExperiment,
    n_subtracted: usize,
    rng: &mut R,
) -> (TrialOutcome, TrialOutcome) {
    let s = &e.scenario;
    assert_eq!(s.n_pilot_users, 2, "one co-pilot interferer");
    assert!(n_subtracted <= s.n_slot_users - 2);
    let (m, n_d, n_p) = (s.antennas, e.payload_len(), s.n_pilots);
    let c = &e.constellation;
    let book = PilotBook::new(n_p).expect("validated pilot count");
    let seqs: Vec<Vec<C64>> = (0..n_p).map(|j| book.sequence(j)).collect();
    let me = random_packet(&e.code, c, rng);
    let h0 = draw_channel(m, rng).0;
    let others: Vec<(Vec<C64>, Vec<C64>, usize)> = (1..s.n_slot_users)
        .map(|k| {
            let pilot = if k == 1 { 0 } else { rng.random_range(1..n_p) };
            (draw_channel(m, rng).0, random_symbols(n_d, c, rng), pilot)
        })
        .collect();
    let mut tx = vec![SlotTx {
        channel: &h0,
        pilot: &seqs[0],
        payload: &me.symbols,
    }];
    tx.extend(others.iter().map(|(h, x, j)| SlotTx {
        channel: h,
        pilot: &seqs[*j],
        payload: x,
    }));
    let noise = NoiseSpec::new(s.noise_var).expect("validated noise");
    let mut slot = synthesize_slot(m, n_p, n_d, &tx, noise, rng).expect("consistent dimensions");
    let eps = exhaustion_threshold(m);

    let phi = estimate_channel_pilot(&slot, &seqs[0]);
    let mut acc = mrc_estimate(&phi, &slot);
    chb_subtract(&mut acc, &others[0].1, m);
    let x_chb: Vec<C64> = acc
        .f
        .iter()
        .map(|v| v / acc.g.max(f64::MIN_POSITIVE))
        .collect();
    let chb = score(&x_chb, acc.g, eps, &me, &e.code, c);

    for (_, x, j) in others[1..=n_subtracted]
        .iter()
        .chain(core::iter::once(&others[0]))
    {
        let h_hat = estimate_channel_payload(&slot, x);
        pab_subtract_replica(&mut slot, &h_hat, &seqs[*j], x);
    }
    let phi = estimate_channel_pilot(&slot, &seqs[0]);
    let acc = mrc_estimate(&phi, &slot);
    let x_pab: Vec<C64> = acc
        .f
        .iter()
        .map(|v| v / acc.g.max(f64::MIN_POSITIVE))
        .collect();
    let pab = score(&x_pab, acc.g, eps, &me, &e.code, c);
    (chb, pab)
}

/// Payload-based channel estimation error `ĥ − h` for one user among
/// `n_slot_users` in a slot, returned per antenna.
pub fn payload_estimate_error<R: Rng + ?Sized>(
    n_slot_users: usize,
    antennas: usize,
    n_payload: usize,
    noise: NoiseSpec,
    c: &Constellation,
    rng: &mut R,
) -> Vec<C64> {
    let pilot = [C64::new(1.0, 0.0), C64::new(1.0, 0.0)];
    let users: Vec<(Vec<C64>, Vec<C64>)> = (0..n_slot_users)
        .map(|_| {
            (
                draw_channel(antennas, rng).0,
                random_symbols(n_payload, c, rng),
            )
        })
        .collect();
    let tx: Vec<SlotTx<'_>> = users
        .iter()
        .map(|(h, x)| SlotTx {
            channel: h,
            pilot: &pilot,
            payload: x,
        })
        .collect();
    let slot =
        synthesize_slot(antennas, 2, n_payload, &tx, noise, rng).expect("consistent dimensions");
    let h_hat = estimate_channel_payload(&slot, &users[0].1);
    h_hat.iter().zip(&users[0].0).map(|(a, b)| a - b).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::{p_fail, PfailCode, QamErrorParams};
    use crate::rng::{Domain, Streams};

    fn experiment(a: usize, aj: usize, s2: f64, m: usize) -> SingletonExperiment {
        SingletonExperiment {
            scenario: InterferenceScenario {
                n_slot_users: a,
                n_pilot_users: aj,
                noise_var: s2,
                n_pilots: 64,
                antennas: m,
            },
            code: CodeSpec::bch_511_421(),
            constellation: Constellation::qpsk(),
        }
    }

    fn failure_rate(e: &SingletonExperiment, trials: usize, seed: u64, full: bool) -> f64 {
        let mut rng = Streams::new(seed).frame(0).stream(Domain::Trial, 0);
        let fails = (0..trials)
            .filter(|_| {
                let o = if full {
                    chb_singleton_trial_full(e, &mut rng)
                } else {
                    chb_singleton_trial(e, &mut rng)
                };
                o.failed(&e.code)
            })
            .count();
        fails as f64 / trials as f64
    }

    #[test]
    fn fast_and_full_routes_agree() {
        let e = experiment(12, 1, 1.0, 64);
        let n = 3000;
        let fast = failure_rate(&e, n, 1, false);
        let full = failure_rate(&e, n, 2, true);
        let se = libm::sqrt(2.0 * fast.max(full) * (1.0 - fast.min(full)) / n as f64);
        assert!(
            fast > 0.05 && fast < 0.95,
            "pick a point with both outcomes: {fast}"
        );
        assert!((fast - full).abs() < 4.0 * se, "{fast} vs {full}");
    }

    #[test]
    fn lone_noiseless_user_always_decodes() {
        let e = experiment(1, 1, 0.0, 16);
        assert_eq!(failure_rate(&e, 50, 3, false), 0.0);
        assert_eq!(failure_rate(&e, 20, 3, true), 0.0);
    }

    #[test]
    fn closed_form_matches_when_failures_are_common() {
        let e = experiment(50, 1, 1.0, 256);
        let sim = failure_rate(&e, 4000, 4, false);
        let q = QamErrorParams::new(4).unwrap();
        let ana = p_fail(&e.scenario, PfailCode { n_d: 256, t: 10 }, &q).unwrap();
        assert!((sim / ana - 1.0).abs() < 0.15, "sim {sim} analytic {ana}");
    }

    #[test]
    fn closed_form_is_optimistic_for_rare_failures() {
        // the interference power seen by one user fluctuates from trial to
        // trial; the Gaussian model with a fixed variance misses that tail
        let e = experiment(36, 1, 1.0, 256);
        let sim = failure_rate(&e, 6000, 6, false);
        let q = QamErrorParams::new(4).unwrap();
        let ana = p_fail(&e.scenario, PfailCode { n_d: 256, t: 10 }, &q).unwrap();
        assert!(sim > 1.5 * ana, "sim {sim} analytic {ana}");
    }

    #[test]
    fn payload_estimate_error_variance() {
        let mut rng = Streams::new(5).frame(0).stream(Domain::Trial, 0);
        let c = Constellation::qpsk();
        let trials = 1500;
        let mut acc = 0.0;
        for _ in 0..trials {
            acc += norm_sq(&payload_estimate_error(
                11,
                8,
                256,
                NoiseSpec::noiseless(),
                &c,
                &mut rng,
            ));
        }
        let var = acc / (trials * 8) as f64;
        assert!((var / (10.0 / 256.0) - 1.0).abs() < 0.1, "{var}");
    }
}
