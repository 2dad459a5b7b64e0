//! Sampling-clock offset from the phase slope of the second training symbol.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::dsp::wrap_phase;
use crate::error::{Error, Result};
use crate::params::OfdmParams;

/// Index of the training symbol used for the slope (counting from 1).
pub const SLOPE_SYMBOL_INDEX: f64 = 2.0;

/// Minimum usable subcarriers per polarization for a fit.
pub const MIN_FIT_SUBCARRIERS: usize = 8;

/// One least-squares phase-slope fit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScoFit {
    /// Radians per subcarrier.
    pub slope_m: f64,
    /// One intercept per input polarization.
    pub intercepts: Vec<f64>,
    pub gamma: f64,
    pub r_squared: f64,
    /// Signed subcarrier index per fitted point, per polarization.
    pub subcarriers: Vec<Vec<i64>>,
    /// Unwrapped phases matching `subcarriers`.
    pub phases: Vec<Vec<f64>>,
}

/// Accumulated outcome of the estimate/resample loop.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScoEstimate {
    /// Slope equivalent of `gamma`.
    pub slope_m: f64,
    pub gamma: f64,
    pub iterations: usize,
    /// Magnitude of the last correction.
    pub residual_gamma: f64,
    /// Correction applied at each iteration.
    pub history: Vec<f64>,
}

pub fn gamma_from_slope(m: f64, params: &OfdmParams) -> f64 {
    m * params.n_fft as f64 / (2.0 * PI * SLOPE_SYMBOL_INDEX * params.symbol_len() as f64)
}

pub fn slope_from_gamma(gamma: f64, params: &OfdmParams) -> f64 {
    gamma * 2.0 * PI * SLOPE_SYMBOL_INDEX * params.symbol_len() as f64 / params.n_fft as f64
}

impl ScoEstimate {
    pub fn from_history(history: Vec<f64>, params: &OfdmParams) -> Self {
        let gamma: f64 = history.iter().sum();
        let slope_m: f64 = history.iter().map(|&g| slope_from_gamma(g, params)).sum();
        Self {
            slope_m,
            gamma,
            iterations: history.len(),
            residual_gamma: history.last().map_or(0.0, |g| g.abs()),
            history,
        }
    }
}

/// Sequential unwrap over ascending index. Gaps wider than one bin are
/// bridged by extending the average slope seen so far.
pub fn unwrap_phases(idx: &[i64], raw: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(raw.len());
    for (i, (&k, &p)) in idx.iter().zip(raw).enumerate() {
        if i == 0 {
            out.push(p);
            continue;
        }
        let prev = out[i - 1];
        let gap = (k - idx[i - 1]) as f64;
        let slope = if i >= 2 {
            (prev - out[0]) / (idx[i - 1] - idx[0]) as f64
        } else {
            0.0
        };
        let predicted = if gap > 1.0 { prev + slope * gap } else { prev };
        out.push(predicted + wrap_phase(p - predicted));
    }
    out
}

/// Fits one common slope and per-polarization intercepts to the phase of
/// `rx/tx` on occupied subcarriers. `rx` and `tx` hold full spectra.
pub fn estimate_sco(
    rx: &[&[Complex64]],
    tx: &[&[Complex64]],
    params: &OfdmParams,
) -> Result<ScoFit> {
    if rx.is_empty() || rx.len() != tx.len() {
        return Err(Error::Length {
            expected: tx.len().max(1),
            actual: rx.len(),
        });
    }
    let signed = params.occupied_signed();
    let bins = params.occupied_bins();
    let mut subcarriers = Vec::new();
    let mut phases = Vec::new();
    for (r, t) in rx.iter().zip(tx) {
        if r.len() != params.n_fft || t.len() != params.n_fft {
            return Err(Error::Length {
                expected: params.n_fft,
                actual: r.len().min(t.len()),
            });
        }
        let (mut ks, mut raw) = (Vec::new(), Vec::new());
        for (&k, &b) in signed.iter().zip(&bins) {
            if t[b].norm_sqr() > 0.0 && r[b].norm_sqr() > 0.0 {
                ks.push(k);
                raw.push((r[b] / t[b]).arg());
            }
        }
        if ks.len() < MIN_FIT_SUBCARRIERS {
            return Err(Error::InsufficientData(format!(
                "{} usable subcarriers, need {MIN_FIT_SUBCARRIERS}",
                ks.len()
            )));
        }
        phases.push(unwrap_phases(&ks, &raw));
        subcarriers.push(ks);
    }

    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut means = Vec::new();
    for (ks, ph) in subcarriers.iter().zip(&phases) {
        let n = ks.len() as f64;
        let kb = ks.iter().sum::<i64>() as f64 / n;
        let pb = ph.iter().sum::<f64>() / n;
        for (&k, &p) in ks.iter().zip(ph) {
            sxy += (k as f64 - kb) * (p - pb);
            sxx += (k as f64 - kb).powi(2);
        }
        means.push((kb, pb));
    }
    let slope_m = sxy / sxx;
    let intercepts: Vec<f64> = means.iter().map(|(kb, pb)| pb - slope_m * kb).collect();
    let (mut ss_res, mut ss_tot) = (0.0, 0.0);
    for ((ks, ph), (&c, &(_, pb))) in subcarriers.iter().zip(&phases).zip(intercepts.iter().zip(&means)) {
        for (&k, &p) in ks.iter().zip(ph) {
            ss_res += (p - (slope_m * k as f64 + c)).powi(2);
            ss_tot += (p - pb).powi(2);
        }
    }
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(ScoFit {
        slope_m,
        intercepts,
        gamma: gamma_from_slope(slope_m, params),
        r_squared,
        subcarriers,
        phases,
    })
}
