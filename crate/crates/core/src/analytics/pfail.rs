use super::interference::{
    symbol_error_given_w, var_interference_post_chb, InterferenceScenario, QamErrorParams,
};
use super::quadrature::{integrate, Tolerance};
use crate::error::{invalid, Result};

/// The two code parameters the failure model needs: symbols per packet and
/// correctable errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PfailCode {
    pub n_d: usize,
    pub t: usize,
}

fn ln_choose(n: usize, k: usize) -> f64 {
    libm::lgamma(n as f64 + 1.0) - libm::lgamma(k as f64 + 1.0) - libm::lgamma((n - k) as f64 + 1.0)
}

fn log_sum_exp(terms: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = terms.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + libm::log(terms.map(|x| libm::exp(x - max)).sum::<f64>())
}

/// Probability that more than `t` of `n_d` symbols are wrong when each is
/// wrong independently with probability `p_e`.
///
/// The shorter of the two tails is summed in log space, so results far
/// below machine epsilon and results close to one are both accurate.
pub fn p_fail_given_w(p_e: f64, n_d: usize, t: usize) -> f64 {
    if t >= n_d || p_e <= 0.0 {
        return 0.0;
    }
    if p_e >= 1.0 {
        return 1.0;
    }
    let (lp, lq) = (libm::log(p_e), libm::log1p(-p_e));
    let term = move |d: usize| ln_choose(n_d, d) + d as f64 * lp + (n_d - d) as f64 * lq;
    if (n_d as f64) * p_e <= t as f64 {
        libm::exp(log_sum_exp((t + 1..=n_d).map(term))).min(1.0)
    } else {
        (1.0 - libm::exp(log_sum_exp((0..=t).map(term)))).max(0.0)
    }
}

/// Log density of the chi-square distribution with `2M` degrees of freedom,
/// `w^(M-1) e^(-w/2) / (2^M Γ(M))`.
pub fn chi_square_log_density(w: f64, m: usize) -> f64 {
    if w <= 0.0 {
        return if m == 1 && w == 0.0 {
            -core::f64::consts::LN_2
        } else {
            f64::NEG_INFINITY
        };
    }
    let m = m as f64;
    (m - 1.0) * libm::log(w) - 0.5 * w - m * core::f64::consts::LN_2 - libm::lgamma(m)
}

/// Integration window for `w = 2‖h‖²`: twelve standard deviations of the
/// chi-square(2M) law on each side of its mean.
pub(crate) fn chi_square_window(m: usize) -> (f64, f64) {
    let mean = 2.0 * m as f64;
    let half = 12.0 * 2.0 * libm::sqrt(m as f64);
    ((mean - half).max(0.0), mean + half)
}

/// Decoding failure probability of a singleton user, averaged over its
/// channel gain.
pub fn p_fail(s: &InterferenceScenario, code: PfailCode, q: &QamErrorParams) -> Result<f64> {
    s.validate()?;
    let var_i = var_interference_post_chb(s);
    let m = s.antennas;
    let integrand = |w: f64| {
        let density = libm::exp(chi_square_log_density(w, m));
        if density == 0.0 {
            return 0.0;
        }
        density * p_fail_given_w(symbol_error_given_w(w, var_i, q), code.n_d, code.t)
    };
    let (lo, hi) = chi_square_window(m);
    let tol = Tolerance {
        rel: 1e-8,
        ..Tolerance::default()
    };
    Ok(integrate(integrand, lo, hi, tol)?.value.clamp(0.0, 1.0))
}

/// Large-array shortcut: the conditional failure probability at the mean
/// gain `w = 2M`.
pub fn p_fail_mean_channel(
    s: &InterferenceScenario,
    code: PfailCode,
    q: &QamErrorParams,
) -> Result<f64> {
    s.validate()?;
    let w = 2.0 * s.antennas as f64;
    let pe = symbol_error_given_w(w, var_interference_post_chb(s), q);
    Ok(p_fail_given_w(pe, code.n_d, code.t))
}

/// Packet loss rate without interference cancellation when `k_a` users each
/// place `r` replicas uniformly over `n_s` slots and `n_p` pilots:
/// `(1 - (1 - r/(n_s n_p))^(k_a-1))^r`.
pub fn plr_no_sic(k_a: usize, r: usize, n_s: usize, n_p: usize) -> Result<f64> {
    if k_a == 0 || r == 0 || n_p == 0 || r > n_s {
        return Err(invalid(alloc::format!(
            "plr_no_sic needs k_a >= 1 and 1 <= r <= n_s, n_p >= 1 (k_a={k_a}, r={r}, n_s={n_s}, n_p={n_p})"
        )));
    }
    let busy = r as f64 / (n_s as f64 * n_p as f64);
    let free = libm::exp((k_a - 1) as f64 * libm::log1p(-busy));
    Ok(libm::pow(1.0 - free, r as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(a: usize, aj: usize, s2: f64) -> InterferenceScenario {
        InterferenceScenario {
            n_slot_users: a,
            n_pilot_users: aj,
            noise_var: s2,
            n_pilots: 64,
            antennas: 256,
        }
    }

    const CODE: PfailCode = PfailCode { n_d: 256, t: 10 };

    fn rel(a: f64, b: f64) -> f64 {
        (a / b - 1.0).abs()
    }

    #[test]
    fn binomial_tail_edges() {
        assert_eq!(p_fail_given_w(0.0, 256, 10), 0.0);
        assert_eq!(p_fail_given_w(1.0, 256, 10), 1.0);
        assert_eq!(p_fail_given_w(0.3, 10, 10), 0.0);
    }

    #[test]
    fn binomial_tail_values() {
        // exact summation references
        assert!(rel(p_fail_given_w(0.02, 256, 10), 0.015_016_1) < 1e-4);
        assert!(rel(p_fail_given_w(0.5, 20, 10), 0.411_901_474) < 1e-8);
        // both branches agree around the switch point
        let a = p_fail_given_w(10.0 / 256.0, 256, 10);
        let b = p_fail_given_w(10.0 / 256.0 + 1e-12, 256, 10);
        assert!((a - b).abs() < 1e-9);
        // deep tail does not underflow to zero
        let deep = p_fail_given_w(1e-4, 256, 10);
        assert!(deep > 0.0 && deep < 1e-20);
    }

    #[test]
    fn chi_square_density_normalizes() {
        for m in [8usize, 64, 256] {
            let (lo, hi) = chi_square_window(m);
            let r = integrate(
                |w| libm::exp(chi_square_log_density(w, m)),
                lo,
                hi,
                Tolerance::default(),
            )
            .unwrap();
            assert!((r.value - 1.0).abs() < 1e-8, "M={m}: {}", r.value);
        }
    }

    #[test]
    fn noiseless_lone_user_never_fails() {
        let q = QamErrorParams::new(4).unwrap();
        assert_eq!(p_fail(&scenario(1, 1, 0.0), CODE, &q).unwrap(), 0.0);
        assert!(p_fail(&scenario(1, 1, 1e-6), CODE, &q).unwrap() < 1e-300);
    }

    #[test]
    fn reference_grid() {
        // independent quadrature of the same model
        let q = QamErrorParams::new(4).unwrap();
        let cases = [
            (20, 1, 1.0, 3.723_435e-10),
            (30, 1, 1.0, 3.888_161e-5),
            (36, 1, 1.0, 1.621_538e-3),
            (40, 1, 1.0, 9.206_119e-3),
            (50, 1, 1.0, 1.344_805e-1),
            (20, 2, 1.0, 1.180_152e-2),
            (10, 3, 1.0, 1.289_333e-4),
            (15, 1, 10.0, 4.577_188e-6),
            (25, 1, 10.0, 5.860_096e-3),
            (5, 2, 10.0, 7.290_088e-5),
            (5, 3, 10.0, 5.242_029e-2),
        ];
        for (a, aj, s2, want) in cases {
            let got = p_fail(&scenario(a, aj, s2), CODE, &q).unwrap();
            assert!(
                rel(got, want) < 1e-5,
                "|A|={a} |Aj|={aj} s2={s2}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn monotone_over_lattice() {
        let q = QamErrorParams::new(4).unwrap();
        let pf = |a, aj, s2, t, m| {
            let s = InterferenceScenario {
                antennas: m,
                ..scenario(a, aj, s2)
            };
            p_fail(&s, PfailCode { n_d: 256, t }, &q).unwrap()
        };
        for a in [4usize, 12, 24, 36] {
            for aj in 1..=3 {
                for s2 in [0.1, 1.0, 10.0] {
                    let base = pf(a, aj, s2, 10, 256);
                    assert!(pf(a + 2, aj, s2, 10, 256) >= base);
                    assert!(pf(a, aj + 1, s2, 10, 256) >= base);
                    assert!(pf(a, aj, s2 * 2.0, 10, 256) >= base);
                    assert!(pf(a, aj, s2, 12, 256) <= base);
                    assert!(pf(a, aj, s2, 10, 512) <= base);
                }
            }
        }
    }

    #[test]
    fn mean_channel_shortcut_converges_only_for_frequent_failures() {
        // the shortcut ignores the spread of ‖h‖⁴/M, which dominates the
        // tail: it is far too optimistic for rare failures and only lands
        // within 20% once failures are common
        let q = QamErrorParams::new(4).unwrap();
        let at = |a| {
            let s = scenario(a, 1, 1.0);
            (
                p_fail(&s, CODE, &q).unwrap(),
                p_fail_mean_channel(&s, CODE, &q).unwrap(),
            )
        };
        let (exact, approx) = at(40);
        assert!(approx < 0.05 * exact, "{approx} vs {exact}");
        for a in (58..=118).step_by(6) {
            let (exact, approx) = at(a);
            assert!(exact > 0.35);
            assert!(rel(approx, exact) < 0.2, "|A|={a}: {approx} vs {exact}");
        }
        assert!(rel(at(64).1, 0.651_99) < 1e-4);
    }

    #[test]
    fn plr_no_sic_values() {
        assert_eq!(plr_no_sic(1, 3, 78, 64).unwrap(), 0.0);
        assert!((plr_no_sic(2, 1, 1, 2).unwrap() - 0.5).abs() < 1e-15);
        assert!(rel(plr_no_sic(180, 3, 78, 64).unwrap(), 1.0617e-3) < 1e-3);
        assert!(rel(plr_no_sic(500, 3, 78, 64).unwrap(), 1.7406e-2) < 1e-3);
        assert!(plr_no_sic(10, 4, 3, 64).is_err());
        assert!(plr_no_sic(0, 3, 78, 64).is_err());
    }
}
