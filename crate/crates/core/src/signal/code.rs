use crate::error::{invalid, Result};

/// Parameters of the `(n, k, t)` block code protecting each payload.
///
/// The code itself is not implemented: decoding is modeled as a genie
/// bounded-distance decoder (success iff at most `t` of the `n` code bits are
/// wrong) followed by a CRC that never accepts a wrong codeword. `n_extra`
/// counts payload bits carrying no information (CRC plus padding).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodeSpec {
    pub n: usize,
    pub k: usize,
    pub t: usize,
    pub n_extra: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeOutcome {
    Success,
    Failure,
}

impl DecodeOutcome {
    pub fn is_success(self) -> bool {
        self == DecodeOutcome::Success
    }
}

impl CodeSpec {
    pub fn new(n: usize, k: usize, t: usize, n_extra: usize) -> Result<Self> {
        if k == 0 || k >= n {
            return Err(invalid(alloc::format!("need 0 < k < n, got n={n} k={k}")));
        }
        if n_extra >= k {
            return Err(invalid(alloc::format!(
                "n_extra ({n_extra}) must be smaller than k ({k})"
            )));
        }
        Ok(Self { n, k, t, n_extra })
    }

    /// The (511, 421, 10) BCH code with 33 non-information bits.
    pub fn bch_511_421() -> Self {
        Self {
            n: 511,
            k: 421,
            t: 10,
            n_extra: 33,
        }
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    /// Codeword bits after zero padding to a whole number of symbols.
    pub fn padded_len(&self, bits_per_symbol: usize) -> usize {
        self.n.div_ceil(bits_per_symbol) * bits_per_symbol
    }

    /// Payload length in symbols.
    pub fn symbols(&self, bits_per_symbol: usize) -> usize {
        self.padded_len(bits_per_symbol) / bits_per_symbol
    }
}

pub fn hamming_distance(a: &[u8], b: &[u8]) -> usize {
    a.iter()
        .zip(b)
        .filter(|(x, y)| (**x ^ **y) & 1 == 1)
        .count()
}

/// Genie bounded-distance decoding against the transmitted codeword.
pub fn bounded_distance_decode(
    received: &[u8],
    codeword: &[u8],
    spec: &CodeSpec,
) -> Result<DecodeOutcome> {
    if received.len() != spec.n || codeword.len() != spec.n {
        return Err(invalid(alloc::format!(
            "decoder expects {} bits, got {} received / {} reference",
            spec.n,
            received.len(),
            codeword.len()
        )));
    }
    Ok(if hamming_distance(received, codeword) <= spec.t {
        DecodeOutcome::Success
    } else {
        DecodeOutcome::Failure
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn boundary_at_t() {
        let spec = CodeSpec::bch_511_421();
        let cw = vec![0u8; 511];
        let mut rx = cw.clone();
        assert!(bounded_distance_decode(&rx, &cw, &spec)
            .unwrap()
            .is_success());
        for b in rx.iter_mut().take(10) {
            *b = 1;
        }
        assert!(bounded_distance_decode(&rx, &cw, &spec)
            .unwrap()
            .is_success());
        rx[10] = 1;
        assert_eq!(
            bounded_distance_decode(&rx, &cw, &spec).unwrap(),
            DecodeOutcome::Failure
        );
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let spec = CodeSpec::bch_511_421();
        assert!(bounded_distance_decode(&[0; 510], &[0; 511], &spec).is_err());
        assert!(bounded_distance_decode(&[0; 511], &[0; 512], &spec).is_err());
    }

    #[test]
    fn padding_to_qpsk() {
        let spec = CodeSpec::bch_511_421();
        assert_eq!(spec.padded_len(2), 512);
        assert_eq!(spec.symbols(2), 256);
        assert_eq!(CodeSpec::new(255, 207, 6, 33).unwrap().symbols(2), 128);
        assert_eq!(CodeSpec::new(1023, 843, 18, 33).unwrap().symbols(2), 512);
    }

    #[test]
    fn invalid_specs() {
        assert!(CodeSpec::new(10, 10, 1, 0).is_err());
        assert!(CodeSpec::new(10, 0, 1, 0).is_err());
        assert!(CodeSpec::new(10, 5, 1, 5).is_err());
    }
}
