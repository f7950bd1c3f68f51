use crate::error::{invalid, Result};

/// A singleton user on pilot `j` in a slot where `|A|` users transmit and
/// `|A^j|` of them share pilot `j` (the other `|A^j| - 1` already decoded
/// elsewhere).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferenceScenario {
    pub n_slot_users: usize,
    pub n_pilot_users: usize,
    pub noise_var: f64,
    pub n_pilots: usize,
    pub antennas: usize,
}

impl InterferenceScenario {
    pub fn validate(&self) -> Result<()> {
        if self.n_pilot_users == 0 || self.n_pilot_users > self.n_slot_users {
            return Err(invalid(alloc::format!(
                "need 1 <= |A^j| <= |A|, got |A^j|={} |A|={}",
                self.n_pilot_users,
                self.n_slot_users
            )));
        }
        if self.noise_var < 0.0 || self.n_pilots == 0 || self.antennas == 0 {
            return Err(invalid(
                "noise variance, pilots and antennas must be non-negative/positive",
            ));
        }
        Ok(())
    }

    fn noise_tail(&self) -> f64 {
        let s2 = self.noise_var;
        s2 / self.n_pilots as f64 * (self.n_slot_users as f64 + s2)
    }
}

/// Variance of each entry of the interference term of `f_j` before any
/// cancellation: `M (|A^j|(|A| - 1 + σ²) + σ²/N_P (|A| + σ²))`.
pub fn var_interference_initial(s: &InterferenceScenario) -> f64 {
    let a = s.n_slot_users as f64;
    let aj = s.n_pilot_users as f64;
    s.antennas as f64 * (aj * (a - 1.0 + s.noise_var) + s.noise_tail())
}

/// Same after `|A^j| - 1` channel-hardening subtractions, which leave
/// `(‖h_k‖² - M) x(k)` residues of variance `M` each:
/// `M (|A^j|(|A| + σ²) - 1 + σ²/N_P (|A| + σ²))`.
pub fn var_interference_post_chb(s: &InterferenceScenario) -> f64 {
    let a = s.n_slot_users as f64;
    let aj = s.n_pilot_users as f64;
    s.antennas as f64 * (aj * (a + s.noise_var) - 1.0 + s.noise_tail())
}

/// Square QAM constants of the symbol error expression.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QamErrorParams {
    pub order: usize,
    pub a: f64,
    pub c: f64,
}

impl QamErrorParams {
    pub fn new(order: usize) -> Result<Self> {
        if order < 4 {
            return Err(invalid(alloc::format!(
                "QAM order must be >= 4, got {order}"
            )));
        }
        let m = order as f64;
        Ok(Self {
            order,
            a: 2.0 - 2.0 / libm::sqrt(m),
            c: 3.0 / (8.0 * m - 8.0),
        })
    }
}

/// Symbol error probability given `w = 2‖h‖²` and interference variance
/// `var_i`: `A erfc(u) - A²/4 erfc²(u)` with `u = sqrt(C w² / var_i)`.
pub fn symbol_error_given_w(w: f64, var_i: f64, q: &QamErrorParams) -> f64 {
    let e = if var_i > 0.0 {
        libm::erfc(libm::sqrt(q.c * w * w / var_i))
    } else if w > 0.0 {
        0.0
    } else {
        1.0
    };
    q.a * e - q.a * q.a / 4.0 * e * e
}

/// `Es/N0 = ‖h‖⁴ / var_i = w² / (4 var_i)` of the equivalent additive
/// Gaussian channel.
pub fn es_n0_equivalent(w: f64, var_i: f64) -> f64 {
    w * w / (4.0 * var_i)
}
