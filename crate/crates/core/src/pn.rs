//! Binary pseudo-random weighting sequence from a 16-bit LFSR.

use crate::error::{Error, Result};

/// Default LFSR seed.
pub const DEFAULT_PN_SEED: u16 = 0xACE1;

/// Fibonacci LFSR for x^16 + x^12 + x^3 + x + 1 (maximal, period 65535).
#[derive(Clone, Debug)]
pub struct Lfsr16 {
    state: u16,
}

impl Lfsr16 {
    pub fn new(seed: u16) -> Result<Self> {
        if seed == 0 {
            return Err(Error::Param("LFSR seed must be nonzero".into()));
        }
        Ok(Self { state: seed })
    }

    pub fn state(&self) -> u16 {
        self.state
    }

    /// Shifts once and returns the new feedback bit.
    pub fn next_bit(&mut self) -> u8 {
        let s = self.state;
        let b = ((s >> 15) ^ (s >> 11) ^ (s >> 2) ^ s) & 1;
        self.state = (s << 1) | b;
        b as u8
    }
}

/// `len` chips mapped 0 -> +1, 1 -> -1.
pub fn pn_chips(seed: u16, len: usize) -> Result<Vec<f64>> {
    let mut lfsr = Lfsr16::new(seed)?;
    Ok((0..len)
        .map(|_| if lfsr.next_bit() == 0 { 1.0 } else { -1.0 })
        .collect())
}

/// Weighting sequence of length `n_fft + n_cp` whose first `n_cp` entries
/// repeat its last `n_cp`, so it can multiply a CP-prefixed symbol without
/// breaking the prefix.
pub fn pn_sequence(seed: u16, n_fft: usize, n_cp: usize) -> Result<Vec<f64>> {
    if n_cp > n_fft {
        return Err(Error::Param("n_cp larger than n_fft".into()));
    }
    let w = pn_chips(seed, n_fft)?;
    let mut out = w[n_fft - n_cp..].to_vec();
    out.extend_from_slice(&w);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maximal_period() {
        let mut l = Lfsr16::new(DEFAULT_PN_SEED).unwrap();
        let mut period = 0u32;
        loop {
            l.next_bit();
            period += 1;
            if l.state() == DEFAULT_PN_SEED {
                break;
            }
            assert!(period <= 65535);
        }
        assert_eq!(period, 65535);
    }

    #[test]
    fn cp_consistent() {
        let p = pn_sequence(DEFAULT_PN_SEED, 512, 46).unwrap();
        assert_eq!(p.len(), 558);
        assert_eq!(&p[..46], &p[512..]);
        assert!(p.iter().all(|&v| v == 1.0 || v == -1.0));
    }

    #[test]
    fn zero_seed_rejected() {
        assert!(Lfsr16::new(0).is_err());
    }
}
