//! Fractional and integer carrier-frequency-offset estimation.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::timing::metric_terms;
use crate::channel::apply_cfo;
use crate::dsp::Dft;
use crate::error::{Error, Result};
use crate::frame::DualPolWaveform;
use crate::params::OfdmParams;
use crate::training::TrainingSet;

/// Carrier offset split into integer and fractional subcarrier spacings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CfoEstimate {
    pub fractional: f64,
    pub integer: i64,
    pub total_hz: f64,
}

impl CfoEstimate {
    pub fn new(integer: i64, fractional: f64, params: &OfdmParams) -> Self {
        Self {
            fractional,
            integer,
            total_hz: (integer as f64 + fractional) * params.subcarrier_spacing_hz(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FractionalCfo {
    /// In units of the subcarrier spacing, within ±0.5.
    pub value: f64,
    pub low_confidence: bool,
}

/// Fractional CFO from the timing-metric terms at `d_hat`.
///
/// The prefix-group terms (`n <= n_cp`) and the body terms pair samples whose
/// index sums differ by exactly `n_fft`, so the phase between the two partial
/// sums is `2π` times the offset in subcarrier spacings.
pub fn estimate_fractional_cfo(
    r: &DualPolWaveform,
    d_hat: usize,
    alpha: usize,
    params: &OfdmParams,
    pn: &[f64],
) -> Result<FractionalCfo> {
    let needed = d_hat + 2 * params.symbol_len() + alpha;
    if r.len() < needed {
        return Err(Error::Range {
            needed,
            available: r.len(),
        });
    }
    let t = metric_terms(&r.x, &r.y, d_hat, alpha as isize, pn, params);
    let (head, body) = t.split_at(params.n_cp + 1);
    let s_cp: Complex64 = head.iter().sum();
    let s_body: Complex64 = body.iter().sum();
    let mag_cp: f64 = head.iter().map(|v| v.norm()).sum();
    let mag_body: f64 = body.iter().map(|v| v.norm()).sum();
    let low = mag_cp == 0.0
        || mag_body == 0.0
        || s_cp.norm() < 0.1 * mag_cp
        || s_body.norm() < 0.1 * mag_body;
    let value = (s_cp.conj() * s_body).arg() / (2.0 * PI);
    Ok(FractionalCfo {
        value,
        low_confidence: low,
    })
}

/// Removes a carrier offset of `f_hz` from both polarizations.
pub fn compensate_cfo(r: &DualPolWaveform, f_hz: f64) -> Result<DualPolWaveform> {
    apply_cfo(r, -f_hz)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntegerCfo {
    pub q: i64,
    /// Correlation magnitude for shifts `-q_max..=q_max`.
    pub correlation: Vec<f64>,
    pub q_max: usize,
    /// Set when the winning shift lies on the edge of the search range.
    pub at_edge: bool,
}

/// Bin shift maximizing `|Σ_k R[k+q]·conj(Ref[k])|`, where `R` is the
/// spectrum of the first received x training symbol and `Ref` the per-bin
/// sum of both polarizations' first training spectra.
pub fn estimate_integer_cfo(
    r_x: &[Complex64],
    d_hat: usize,
    training: &TrainingSet,
    params: &OfdmParams,
    q_max: usize,
) -> Result<IntegerCfo> {
    let n = params.n_fft;
    if q_max >= n / 2 {
        return Err(Error::Param(format!("q_max {q_max} must be below n_fft/2")));
    }
    let start = d_hat + params.n_cp;
    if r_x.len() < start + n {
        return Err(Error::Range {
            needed: start + n,
            available: r_x.len(),
        });
    }
    let spec = Dft::new(n).forward(&r_x[start..start + n]);
    let reference = training.integer_cfo_reference();
    let active: Vec<usize> = (0..n).filter(|&k| reference[k].norm_sqr() > 0.0).collect();
    let correlation: Vec<f64> = (-(q_max as i64)..=q_max as i64)
        .map(|q| {
            active
                .iter()
                .map(|&k| spec[(k as i64 + q).rem_euclid(n as i64) as usize] * reference[k].conj())
                .sum::<Complex64>()
                .norm()
        })
        .collect();
    let mut best = 0;
    for (i, &c) in correlation.iter().enumerate() {
        if c > correlation[best] {
            best = i;
        }
    }
    Ok(IntegerCfo {
        q: best as i64 - q_max as i64,
        at_edge: best == 0 || best + 1 == correlation.len(),
        correlation,
        q_max,
    })
}
