use crate::error::{invalid, Result};

/// Decoding cost model `C_TOT = (N_s N_P β + K_a γ r α) C_DEC`.
///
/// `beta` scales the initialization sweep, `alpha` counts decode attempts per
/// subtracted replica and `sic_factor` (γ) is the fraction of the `r`
/// replicas per user that still need a subtraction in the SIC phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexityModel {
    pub alpha: f64,
    pub beta: f64,
    pub sic_factor: f64,
    pub c_dec: f64,
}

impl ComplexityModel {
    /// Channel-hardening SIC without instantaneous cancellation.
    pub fn chb_plain(c_dec: f64) -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
            sic_factor: 1.0,
            c_dec,
        }
    }

    /// Worst case of payload-aided SIC with instantaneous cancellation.
    pub fn pab_instantaneous_worst(n_p: usize, c_dec: f64) -> Self {
        Self {
            alpha: n_p as f64,
            beta: n_p as f64,
            sic_factor: 1.0,
            c_dec,
        }
    }

    /// Fits the model to receiver counters. `alpha` is 1 when no
    /// subtraction happened; it can drop below 1 when attempts are skipped
    /// on exhausted or already-resolved pilots.
    pub fn from_counters(
        init_attempts: u64,
        sic_attempts: u64,
        subtractions: u64,
        n_s: usize,
        n_p: usize,
        k_a: usize,
        r: usize,
    ) -> Result<Self> {
        if n_s == 0 || n_p == 0 {
            return Err(invalid("complexity fit needs n_s, n_p >= 1"));
        }
        let replicas = (k_a * r) as f64;
        Ok(Self {
            alpha: if subtractions == 0 {
                1.0
            } else {
                sic_attempts as f64 / subtractions as f64
            },
            beta: init_attempts as f64 / (n_s * n_p) as f64,
            sic_factor: if replicas == 0.0 {
                0.0
            } else {
                subtractions as f64 / replicas
            },
            c_dec: 1.0,
        })
    }

    pub fn validate(&self, n_p: usize, r: usize) -> Result<()> {
        let np = n_p as f64;
        if !(self.alpha > 0.0 && self.alpha <= np) || !(self.beta > 0.0 && self.beta <= np) {
            return Err(invalid(alloc::format!(
                "alpha and beta must lie in (0, {n_p}], got {} and {}",
                self.alpha,
                self.beta
            )));
        }
        if !(self.sic_factor >= 0.0 && self.sic_factor <= 1.0) || r == 0 || self.c_dec < 0.0 {
            return Err(invalid("need 0 <= gamma <= 1, r >= 1 and c_dec >= 0"));
        }
        Ok(())
    }

    pub fn init_cost(&self, n_s: usize, n_p: usize) -> f64 {
        (n_s * n_p) as f64 * self.beta * self.c_dec
    }

    pub fn sic_cost(&self, k_a: usize, r: usize) -> f64 {
        k_a as f64 * self.sic_factor * r as f64 * self.alpha * self.c_dec
    }

    pub fn total(&self, n_s: usize, n_p: usize, k_a: usize, r: usize) -> f64 {
        self.init_cost(n_s, n_p) + self.sic_cost(k_a, r)
    }
}
