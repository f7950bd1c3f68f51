use alloc::vec::Vec;

use crate::channel::SlotSignal;
use crate::linalg::{norm_sq, CMatrix};
use crate::C64;

/// Per-slot state of the payload-aided receiver, kept in the pilot domain.
///
/// Because the pilots are the rows of a Sylvester–Hadamard matrix, `P` is
/// fully described by the pilot estimates `Φ` (row `j` is `φ_j`). Removing
/// `a s_l` from `P` only changes `φ_l`, so after a subtraction `a sᵀ_l`,
/// `a xᵀ` the MRC numerators follow from a rank-one correction:
/// `f_j ← f_j − (φ_jᴴ a) xᵀ` for every `j`, plus `−aᴴY + ‖a‖² xᵀ` on row `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotCache {
    phi: CMatrix,
    y: CMatrix,
    f: CMatrix,
    g: Vec<f64>,
}

impl SlotCache {
    /// Builds the cache from a received slot. The number of pilot columns
    /// must be a power of two.
    pub fn new(signal: &SlotSignal) -> Self {
        let n_p = signal.pilot_len();
        let mut ph = signal.p.clone();
        ph.fwht_rows();
        let mut phi = ph.transpose();
        let scale = 1.0 / n_p as f64;
        let (re, im) = phi.planes_mut();
        for v in re.iter_mut().chain(im.iter_mut()) {
            *v *= scale;
        }
        let f = phi.conj_mul(&signal.y);
        let g = (0..n_p).map(|j| phi.row_norm_sq(j)).collect();
        Self {
            phi,
            y: signal.y.clone(),
            f,
            g,
        }
    }

    pub fn n_pilots(&self) -> usize {
        self.g.len()
    }

    pub fn antennas(&self) -> usize {
        self.y.rows()
    }

    pub fn phi(&self, pilot: usize) -> Vec<C64> {
        self.phi.row(pilot)
    }

    pub fn g(&self, pilot: usize) -> f64 {
        self.g[pilot]
    }

    pub fn f(&self, pilot: usize) -> Vec<C64> {
        self.f.row(pilot)
    }

    /// `Y xᴴ / ‖x‖²` on the current residual.
    pub fn estimate_payload_channel(&self, x: &[C64]) -> Vec<C64> {
        let e = norm_sq(x);
        self.y
            .right_mul_conj(x)
            .into_iter()
            .map(|v| v / e)
            .collect()
    }

    /// Applies `P ← P − a s_lᵀ`, `Y ← Y − a xᵀ`.
    pub fn subtract(&mut self, pilot: usize, a: &[C64], x: &[C64]) {
        let c: Vec<C64> = (0..self.n_pilots())
            .map(|j| {
                let (pr, pi) = self.phi.row_planes(j);
                a.iter()
                    .zip(pr.iter().zip(pi))
                    .map(|(a, (&r, &i))| C64::new(r, -i) * a)
                    .sum()
            })
            .collect();
        let d = self.y.left_mul_conj(a);
        self.y.sub_outer(a, x);
        self.f.sub_outer(&c, x);
        let ea = norm_sq(a);
        let (fr, fi) = self.f.row_planes_mut(pilot);
        for n in 0..fr.len() {
            fr[n] += ea * x[n].re - d[n].re;
            fi[n] += ea * x[n].im - d[n].im;
        }
        let (pr, pi) = self.phi.row_planes_mut(pilot);
        for m in 0..pr.len() {
            pr[m] -= a[m].re;
            pi[m] -= a[m].im;
        }
        self.g[pilot] = self.phi.row_norm_sq(pilot);
    }

    /// Drops `Φ` and `Y`, keeping only the MRC accumulators.
    pub fn into_bank(self) -> MrcBank {
        MrcBank {
            f: self.f,
            g: self.g,
        }
    }
}

/// MRC accumulators `f_j`, `g_j` of every pilot of a slot.
#[derive(Debug, Clone, PartialEq)]
pub struct MrcBank {
    f: CMatrix,
    g: Vec<f64>,
}

impl MrcBank {
    pub fn g(&self, pilot: usize) -> f64 {
        self.g[pilot]
    }

    pub fn f(&self, pilot: usize) -> Vec<C64> {
        self.f.row(pilot)
    }

    /// `f_l ← f_l − M x`, `g_l ← max(g_l − M, 0)`.
    pub fn chb_subtract(&mut self, pilot: usize, x: &[C64], antennas: usize) {
        let m = antennas as f64;
        let (fr, fi) = self.f.row_planes_mut(pilot);
        for n in 0..fr.len() {
            fr[n] -= m * x[n].re;
            fi[n] -= m * x[n].im;
        }
        self.g[pilot] = (self.g[pilot] - m).max(0.0);
    }
}
