use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::C64;

/// Orthogonal pilot sequences: the rows of a Sylvester–Hadamard matrix.
///
/// Row `j` is pilot `j`; it has length `n_pilots` and entries `±1`. The
/// ordering of rows is the natural Sylvester order, which is also the output
/// order of the fast Walsh–Hadamard transform used by the receiver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PilotBook {
    n_pilots: usize,
    signs: Vec<i8>,
}

impl PilotBook {
    pub fn new(n_pilots: usize) -> Result<Self> {
        if n_pilots < 2 || !n_pilots.is_power_of_two() {
            return Err(invalid(alloc::format!(
                "pilot count must be a power of two >= 2, got {n_pilots}"
            )));
        }
        let signs = (0..n_pilots)
            .flat_map(|j| {
                (0..n_pilots).map(move |n| if (j & n).count_ones() % 2 == 0 { 1 } else { -1 })
            })
            .collect();
        Ok(Self { n_pilots, signs })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n_pilots
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Integer `±1` entries of pilot `j`.
    pub fn signs(&self, j: usize) -> &[i8] {
        &self.signs[j * self.n_pilots..(j + 1) * self.n_pilots]
    }

    /// Pilot `j` as complex symbols.
    pub fn sequence(&self, j: usize) -> Vec<C64> {
        self.signs(j)
            .iter()
            .map(|&s| C64::new(f64::from(s), 0.0))
            .collect()
    }

    /// Exact inner product `s_j · s_kᴴ` in integer arithmetic.
    pub fn inner(&self, j: usize, k: usize) -> i64 {
        self.signs(j)
            .iter()
            .zip(self.signs(k))
            .map(|(&a, &b)| i64::from(a) * i64::from(b))
            .sum()
    }
}
