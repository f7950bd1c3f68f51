use gfcsa_core::analytics::{
    chi_square_log_density, integrate, p_fail_given_w, plr_no_sic, Tolerance,
};
use gfcsa_core::channel::{draw_channel, synthesize_slot, NoiseSpec, SlotTx};
use gfcsa_core::receiver::{
    estimate_channel_payload, estimate_channel_pilot, mrc_estimate, ops::subtract_user,
    pab_subtract_replica, SlotCache,
};
use gfcsa_core::rng::{Domain, Streams};
use gfcsa_core::signal::{demap_hard, modulate, Constellation, PilotBook};
use gfcsa_core::C64;
use proptest::prelude::*;
use rand::Rng;

fn close(a: &[C64], b: &[C64], tol: f64) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(x, y)| (x - y).norm() <= tol * (1.0 + y.norm()))
}

/// Noiseless slot with `k` users on distinct pilots.
struct Slot {
    book: PilotBook,
    pilots: Vec<usize>,
    channels: Vec<Vec<C64>>,
    payloads: Vec<Vec<C64>>,
    signal: gfcsa_core::channel::SlotSignal,
}

fn noiseless_slot(seed: u64, log_np: u32, antennas: usize, n_d: usize, k: usize) -> Slot {
    let n_p = 1usize << log_np;
    let k = k.min(n_p);
    let mut rng = Streams::new(seed).frame(0).stream(Domain::Trial, 0);
    let book = PilotBook::new(n_p).unwrap();
    let c = Constellation::qpsk();
    let pilots: Vec<usize> = rand::seq::index::sample(&mut rng, n_p, k).into_vec();
    let channels: Vec<Vec<C64>> = (0..k).map(|_| draw_channel(antennas, &mut rng).0).collect();
    let payloads: Vec<Vec<C64>> = (0..k)
        .map(|_| {
            let bits: Vec<u8> = (0..2 * n_d).map(|_| rng.random_range(0..2u8)).collect();
            modulate(&bits, &c).unwrap()
        })
        .collect();
    let seqs: Vec<Vec<C64>> = pilots.iter().map(|&j| book.sequence(j)).collect();
    let tx: Vec<SlotTx<'_>> = (0..k)
        .map(|u| SlotTx {
            channel: &channels[u],
            pilot: &seqs[u],
            payload: &payloads[u],
        })
        .collect();
    let signal =
        synthesize_slot(antennas, n_p, n_d, &tx, NoiseSpec::noiseless(), &mut rng).unwrap();
    Slot {
        book,
        pilots,
        channels,
        payloads,
        signal,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pilots_are_orthogonal(log_np in 1u32..9) {
        let n = 1usize << log_np;
        let book = PilotBook::new(n).unwrap();
        for j in 0..n {
            for k in 0..n {
                prop_assert_eq!(book.inner(j, k), if j == k { n as i64 } else { 0 });
            }
        }
    }

    #[test]
    fn noiseless_estimation_and_subtraction_round_trip(
        seed in any::<u64>(),
        log_np in 1u32..6,
        antennas in 1usize..24,
        n_d in 1usize..24,
        k in 1usize..12,
    ) {
        let mut s = noiseless_slot(seed, log_np, antennas, n_d, k);
        let c = Constellation::qpsk();
        // pilot estimates are exact whatever the load
        let cache = SlotCache::new(&s.signal);
        for u in 0..s.pilots.len() {
            let seq = s.book.sequence(s.pilots[u]);
            prop_assert!(close(&estimate_channel_pilot(&s.signal, &seq), &s.channels[u], 1e-9));
            prop_assert!(close(&cache.phi(s.pilots[u]), &s.channels[u], 1e-9));
        }
        // removing the others leaves a clean singleton
        for u in 1..s.pilots.len() {
            let seq = s.book.sequence(s.pilots[u]);
            subtract_user(&mut s.signal, &s.channels[u], &seq, &s.payloads[u]);
        }
        let seq = s.book.sequence(s.pilots[0]);
        let phi = estimate_channel_pilot(&s.signal, &seq);
        let x = mrc_estimate(&phi, &s.signal).payload(1e-12).unwrap();
        prop_assert!(close(&x, &s.payloads[0], 1e-9));
        prop_assert_eq!(demap_hard(&x, &c), demap_hard(&s.payloads[0], &c));
        let h = estimate_channel_payload(&s.signal, &s.payloads[0]);
        prop_assert!(close(&h, &s.channels[0], 1e-9));
        pab_subtract_replica(&mut s.signal, &h, &seq, &s.payloads[0]);
        prop_assert!(s.signal.energy() < 1e-18 * (1.0 + antennas as f64));
    }

    #[test]
    fn binomial_tail_is_monotone_in_error_rate(p in 0.0f64..1.0, dp in 0.0f64..0.1, t in 0usize..30) {
        let a = p_fail_given_w(p, 256, t);
        let b = p_fail_given_w((p + dp).min(1.0), 256, t);
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b + 1e-12 >= a);
    }

    #[test]
    fn no_sic_loss_is_monotone_in_load(k in 1usize..2000, r in 1usize..6) {
        let a = plr_no_sic(k, r, 78, 64).unwrap();
        let b = plr_no_sic(k + 1, r, 78, 64).unwrap();
        prop_assert!((0.0..=1.0).contains(&a) && b >= a);
    }
}

#[test]
fn chi_square_density_normalizes_at_256_antennas() {
    let m = 256;
    let half = 24.0 * (m as f64).sqrt();
    let r = integrate(
        |w| chi_square_log_density(w, m).exp(),
        2.0 * m as f64 - half,
        2.0 * m as f64 + half,
        Tolerance::default(),
    )
    .unwrap();
    assert!((r.value - 1.0).abs() < 1e-10, "{}", r.value);
}
