//! Static OFDM frame geometry.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Frame geometry shared by every stage.
///
/// Occupied subcarriers sit symmetrically around DC: one DC null, half of the
/// center nulls on each side of it, then `n_sc / 2` data bins per side, and the
/// remaining band-edge bins are guard nulls.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OfdmParams {
    pub n_fft: usize,
    pub n_cp: usize,
    pub n_sc: usize,
    pub n_dc_null: usize,
    pub n_center_null: usize,
    pub n_guard: usize,
    pub sample_rate_hz: f64,
    pub payload_symbols: usize,
}

impl Default for OfdmParams {
    fn default() -> Self {
        Self::paper()
    }
}

impl OfdmParams {
    /// 512-point transform, 46-sample prefix, 416 data subcarriers at 25 GS/s.
    pub fn paper() -> Self {
        Self {
            n_fft: 512,
            n_cp: 46,
            n_sc: 416,
            n_dc_null: 1,
            n_center_null: 10,
            n_guard: 85,
            sample_rate_hz: 25e9,
            payload_symbols: 50,
        }
    }

    /// A 64-point geometry for fast experiments and tests.
    pub fn small() -> Self {
        Self {
            n_fft: 64,
            n_cp: 8,
            n_sc: 40,
            n_dc_null: 1,
            n_center_null: 2,
            n_guard: 21,
            sample_rate_hz: 1e9,
            payload_symbols: 4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Param(m.to_string()));
        if self.n_fft < 8 || !self.n_fft.is_power_of_two() {
            return fail("n_fft must be a power of two >= 8");
        }
        if self.n_cp == 0 || self.n_cp >= self.n_fft {
            return fail("n_cp must be in 1..n_fft");
        }
        if self.n_dc_null != 1 {
            return fail("exactly one DC null is supported");
        }
        if self.n_sc == 0 || !self.n_sc.is_multiple_of(2) {
            return fail("n_sc must be even and nonzero");
        }
        if !self.n_center_null.is_multiple_of(2) {
            return fail("n_center_null must be even");
        }
        if self.n_sc + self.n_guard + self.n_dc_null + self.n_center_null != self.n_fft {
            return fail("n_sc + n_guard + n_dc_null + n_center_null must equal n_fft");
        }
        if self.first_occupied() + self.n_sc / 2 > self.n_fft / 2 {
            return fail("occupied band does not fit below Nyquist");
        }
        if !(self.sample_rate_hz > 0.0 && self.sample_rate_hz.is_finite()) {
            return fail("sample_rate_hz must be positive");
        }
        Ok(())
    }

    pub fn symbol_len(&self) -> usize {
        self.n_fft + self.n_cp
    }

    /// Frame length in samples: two training symbols plus the payload.
    pub fn frame_len(&self) -> usize {
        (2 + self.payload_symbols) * self.symbol_len()
    }

    pub fn subcarrier_spacing_hz(&self) -> f64 {
        self.sample_rate_hz / self.n_fft as f64
    }

    fn first_occupied(&self) -> usize {
        self.n_center_null / 2 + 1
    }

    /// Signed indices of occupied subcarriers, ascending (negative side first).
    pub fn occupied_signed(&self) -> Vec<i64> {
        let lo = self.first_occupied() as i64;
        let half = (self.n_sc / 2) as i64;
        (-(lo + half - 1)..=-lo).chain(lo..lo + half).collect()
    }

    /// FFT bin of each occupied subcarrier, in the same order as [`Self::occupied_signed`].
    pub fn occupied_bins(&self) -> Vec<usize> {
        let n = self.n_fft as i64;
        self.occupied_signed()
            .into_iter()
            .map(|k| k.rem_euclid(n) as usize)
            .collect()
    }

    /// Smallest Golay exponent covering `n_sc`.
    pub fn golay_exponent(&self) -> u32 {
        self.n_sc.next_power_of_two().trailing_zeros().max(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_geometry() {
        let p = OfdmParams::paper();
        p.validate().unwrap();
        assert_eq!(p.symbol_len(), 558);
        assert_eq!(p.subcarrier_spacing_hz(), 48.828125e6);
        let s = p.occupied_signed();
        assert_eq!(s.len(), 416);
        assert_eq!((s[0], s[207], s[208], s[415]), (-213, -6, 6, 213));
        assert!(s.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(p.occupied_bins()[0], 512 - 213);
        assert_eq!(p.golay_exponent(), 9);
    }

    #[test]
    fn small_geometry_is_valid() {
        OfdmParams::small().validate().unwrap();
    }

    #[test]
    fn budget_mismatch_rejected() {
        let mut p = OfdmParams::paper();
        p.n_guard = 84;
        assert!(p.validate().is_err());
    }
}
