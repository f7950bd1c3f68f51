use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::C64;

/// Square M-QAM with per-axis Gray labels and unit average symbol energy.
///
/// A label has `log2(M)` bits. The first half selects the in-phase level and
/// the second half the quadrature level; on each axis level `i` (counting from
/// the most positive) carries the Gray code `i ^ (i >> 1)`. For QPSK this
/// means bit `b0` picks the sign of the real part and `b1` the sign of the
/// imaginary part, with `0` mapping to positive.
///
/// `points[label]` is the point carrying `label`, so point index and label
/// value coincide.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    order: usize,
    bits_per_symbol: usize,
    points: Vec<C64>,
}

impl Constellation {
    pub fn new(order: usize) -> Result<Self> {
        let bits = order.trailing_zeros() as usize;
        if order < 4 || !order.is_power_of_two() || bits % 2 != 0 {
            return Err(invalid(alloc::format!(
                "square QAM order must be 4^m with m >= 1, got {order}"
            )));
        }
        let half = bits / 2;
        let levels = 1usize << half;
        // mean energy of the unnormalised lattice {±1, ±3, ...}²
        let scale = libm::sqrt(2.0 * (order as f64 - 1.0) / 3.0);
        let amplitude = |gray_label: usize| {
            let idx = gray_to_index(gray_label);
            (levels as f64 - 1.0 - 2.0 * idx as f64) / scale
        };
        let points = (0..order)
            .map(|label| {
                let i_label = label >> half;
                let q_label = label & (levels - 1);
                C64::new(amplitude(i_label), amplitude(q_label))
            })
            .collect();
        Ok(Self {
            order,
            bits_per_symbol: bits,
            points,
        })
    }

    pub fn qpsk() -> Self {
        Self::new(4).expect("QPSK is a valid order")
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn points(&self) -> &[C64] {
        &self.points
    }

    pub fn mean_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.order as f64
    }

    /// Index of the point closest to `z`; ties go to the smaller index.
    pub fn nearest(&self, z: C64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = (z - p).norm_sqr();
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }
}

fn gray_to_index(mut g: usize) -> usize {
    let mut i = g;
    while g > 1 {
        g >>= 1;
        i ^= g;
    }
    i
}

/// Maps bits (MSB first within each symbol) onto constellation points.
pub fn modulate(bits: &[u8], c: &Constellation) -> Result<Vec<C64>> {
    let k = c.bits_per_symbol;
    if bits.len() % k != 0 {
        return Err(invalid(alloc::format!(
            "{} bits do not fill whole {}-bit symbols",
            bits.len(),
            k
        )));
    }
    Ok(bits
        .chunks_exact(k)
        .map(|chunk| {
            let label = chunk
                .iter()
                .fold(0usize, |acc, &b| (acc << 1) | usize::from(b & 1));
            c.points[label]
        })
        .collect())
}

/// Minimum-distance hard decisions, returned as bits.
pub fn demap_hard(symbols: &[C64], c: &Constellation) -> Vec<u8> {
    let k = c.bits_per_symbol;
    let mut out = Vec::with_capacity(symbols.len() * k);
    for &z in symbols {
        let label = c.nearest(z);
        for b in (0..k).rev() {
            out.push(((label >> b) & 1) as u8);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn qpsk_zero_label_is_first_quadrant() {
        let c = Constellation::qpsk();
        let x = modulate(&[0, 0], &c).unwrap();
        assert!((x[0] - C64::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2)).norm() < 1e-15);
        let x = modulate(&[1, 0], &c).unwrap();
        assert!((x[0] - C64::new(-FRAC_1_SQRT_2, FRAC_1_SQRT_2)).norm() < 1e-15);
        let x = modulate(&[0, 1], &c).unwrap();
        assert!((x[0] - C64::new(FRAC_1_SQRT_2, -FRAC_1_SQRT_2)).norm() < 1e-15);
    }

    #[test]
    fn qpsk_slices_by_quadrant() {
        let c = Constellation::qpsk();
        assert_eq!(demap_hard(&[C64::new(0.9, 0.8)], &c), [0, 0]);
        assert_eq!(demap_hard(&[C64::new(-0.1, -3.0)], &c), [1, 1]);
    }

    #[test]
    fn symbol_count_and_length_check() {
        let c = Constellation::qpsk();
        assert_eq!(modulate(&[0u8; 512], &c).unwrap().len(), 256);
        assert!(modulate(&[0u8; 511], &c).is_err());
        let c16 = Constellation::new(16).unwrap();
        assert!(modulate(&[0u8; 6], &c16).is_err());
    }

    #[test]
    fn mean_energy_is_unity() {
        for order in [4, 16, 64, 256] {
            let c = Constellation::new(order).unwrap();
            assert!((c.mean_energy() - 1.0).abs() < 1e-12, "order {order}");
        }
        // 16-QAM lattice: 4 points of energy 2, 8 of 10, 4 of 18 -> 160/16 = 10
        let c16 = Constellation::new(16).unwrap();
        let raw: f64 = c16.points().iter().map(|p| p.norm_sqr() * 10.0).sum();
        assert!((raw - 160.0).abs() < 1e-9);
    }

    #[test]
    fn neighbours_differ_in_one_bit() {
        for order in [4, 16, 64] {
            let c = Constellation::new(order).unwrap();
            let pts = c.points();
            let d_min = pts
                .iter()
                .enumerate()
                .flat_map(|(i, a)| pts[i + 1..].iter().map(move |b| (a - b).norm()))
                .fold(f64::INFINITY, f64::min);
            for (i, a) in pts.iter().enumerate() {
                for (j, b) in pts.iter().enumerate().skip(i + 1) {
                    if ((a - b).norm() - d_min).abs() < 1e-9 {
                        assert_eq!((i ^ j).count_ones(), 1, "order {order}: {i} vs {j}");
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_non_square_orders() {
        for order in [0, 2, 8, 32, 12] {
            assert!(Constellation::new(order).is_err(), "order {order}");
        }
    }
}
