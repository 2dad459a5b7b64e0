//! BER, EVM, CFO error, frame errors and required-OSNR arithmetic.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::OfdmParams;
use crate::receiver::SubcarrierGrid;

/// Fraction of differing bits.
pub fn ber(tx: &[u8], rx: &[u8]) -> Result<f64> {
    let (errors, total) = bit_errors(tx, rx, None)?;
    Ok(errors as f64 / total as f64)
}

/// `(errors, compared)` over positions where `mask` is true (all when `None`).
pub fn bit_errors(tx: &[u8], rx: &[u8], mask: Option<&[bool]>) -> Result<(u64, u64)> {
    if tx.len() != rx.len() {
        return Err(Error::Length {
            expected: tx.len(),
            actual: rx.len(),
        });
    }
    if let Some(m) = mask {
        if m.len() != tx.len() {
            return Err(Error::Length {
                expected: tx.len(),
                actual: m.len(),
            });
        }
    }
    let mut errors = 0u64;
    let mut total = 0u64;
    for (i, (a, b)) in tx.iter().zip(rx).enumerate() {
        if mask.is_none_or(|m| m[i]) {
            total += 1;
            errors += (a != b) as u64;
        }
    }
    if total == 0 {
        return Err(Error::InsufficientData("no bits to compare".into()));
    }
    Ok((errors, total))
}

/// Mean squared CFO error normalized to the subcarrier spacing.
pub fn cfo_mse(estimates_hz: &[f64], truth_hz: f64, spacing_hz: f64) -> f64 {
    if estimates_hz.is_empty() {
        return f64::NAN;
    }
    estimates_hz
        .iter()
        .map(|e| ((e - truth_hz) / spacing_hz).powi(2))
        .sum::<f64>()
        / estimates_hz.len() as f64
}

/// True when `d_hat` lies outside `[d0 - (n_cp - spread), d0]`.
pub fn frame_error(d_hat: usize, d0: usize, spread: usize, params: &OfdmParams) -> bool {
    let early = params.n_cp.saturating_sub(spread);
    d_hat > d0 || d_hat + early < d0
}

/// BER against OSNR, sorted by OSNR.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BerCurve {
    pub points: Vec<(f64, f64)>,
    pub label: String,
}

impl BerCurve {
    pub fn new(points: Vec<(f64, f64)>, label: impl Into<String>) -> Result<Self> {
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Param("OSNR values must be strictly increasing".into()));
        }
        if points.iter().any(|p| !(0.0..=1.0).contains(&p.1)) {
            return Err(Error::Param("BER values must lie in [0, 1]".into()));
        }
        Ok(Self {
            points,
            label: label.into(),
        })
    }
}

/// OSNR at `target_ber`, interpolating log10(BER) linearly in dB between
/// the first bracketing pair of points.
pub fn r_osnr(curve: &BerCurve, target_ber: f64) -> Result<f64> {
    let pts = &curve.points;
    if pts.is_empty() || target_ber.is_nan() || target_ber <= 0.0 {
        return Err(Error::InsufficientData("empty curve or non-positive target".into()));
    }
    if let Some(p) = pts.iter().find(|p| p.1 == target_ber) {
        return Ok(p.0);
    }
    let lt = target_ber.log10();
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (hi, lo) = (a.1.max(b.1), a.1.min(b.1));
        if lo > 0.0 && lo <= target_ber && target_ber <= hi {
            let (la, lb) = (a.1.log10(), b.1.log10());
            return Ok(a.0 + (lt - la) / (lb - la) * (b.0 - a.0));
        }
    }
    let nearest = pts
        .iter()
        .filter(|p| p.1 > 0.0)
        .min_by(|p, q| {
            (p.1.log10() - lt)
                .abs()
                .total_cmp(&(q.1.log10() - lt).abs())
        })
        .copied()
        .unwrap_or(pts[0]);
    Err(Error::NotBracketed {
        target: target_ber,
        nearest_osnr_db: nearest.0,
        nearest_ber: nearest.1,
    })
}

pub fn osnr_penalty(impaired: &BerCurve, baseline: &BerCurve, target_ber: f64) -> Result<f64> {
    Ok(r_osnr(impaired, target_ber)? - r_osnr(baseline, target_ber)?)
}

/// RMS error over RMS reference on occupied subcarriers, in percent.
pub fn evm(eq: &SubcarrierGrid, reference: &SubcarrierGrid, params: &OfdmParams) -> Result<f64> {
    evm_masked(eq, reference, params, None)
}

pub fn evm_masked(
    eq: &SubcarrierGrid,
    reference: &SubcarrierGrid,
    params: &OfdmParams,
    usable: Option<&[bool]>,
) -> Result<f64> {
    if eq.n_symbols() != reference.n_symbols() {
        return Err(Error::Length {
            expected: reference.n_symbols(),
            actual: eq.n_symbols(),
        });
    }
    let bins = params.occupied_bins();
    let (mut err, mut refp) = (0.0, 0.0);
    for p in 0..2 {
        for (a, b) in eq.pol(p).iter().zip(reference.pol(p)) {
            for (j, &k) in bins.iter().enumerate() {
                if usable.is_none_or(|u| u[j]) {
                    err += (a[k] - b[k]).norm_sqr();
                    refp += b[k].norm_sqr();
                }
            }
        }
    }
    if refp == 0.0 {
        return Err(Error::InsufficientData("zero reference power".into()));
    }
    Ok(100.0 * (err / refp).sqrt())
}
