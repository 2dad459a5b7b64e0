//! Demodulation, Alamouti channel estimation, zero-forcing and demapping.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dsp::Dft;
use crate::error::{Error, Result};
use crate::frame::{DualPolWaveform, SymbolGrid};
use crate::params::OfdmParams;
use crate::qam;
use crate::training::TrainingSet;

pub type Jones = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReceiverConfig {
    /// Half-width of the frequency averaging applied to the channel estimate;
    /// 0 keeps the exact per-subcarrier inversion.
    pub smoothing: usize,
    /// Decision-directed common phase correction per payload symbol.
    pub common_phase: bool,
    pub cond_threshold: f64,
}

impl Default for ReceiverConfig {
    fn default() -> Self {
        Self {
            smoothing: 3,
            common_phase: true,
            cond_threshold: 1e6,
        }
    }
}

/// Frequency-domain symbols of both polarizations.
#[derive(Clone, Debug, PartialEq)]
pub struct SubcarrierGrid {
    pub x: SymbolGrid,
    pub y: SymbolGrid,
}

impl SubcarrierGrid {
    pub fn n_symbols(&self) -> usize {
        self.x.len()
    }

    pub fn pol(&self, p: usize) -> &SymbolGrid {
        if p == 0 {
            &self.x
        } else {
            &self.y
        }
    }

    /// Symbols `range` of both polarizations.
    pub fn slice(&self, range: std::ops::Range<usize>) -> SubcarrierGrid {
        SubcarrierGrid {
            x: self.x[range.clone()].to_vec(),
            y: self.y[range].to_vec(),
        }
    }
}

/// Per-subcarrier Jones matrices over the occupied band.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelEstimate {
    pub h: Vec<Jones>,
    pub condition: Vec<f64>,
    pub usable: Vec<bool>,
}

/// CP strip and unitary forward transform of `n_symbols` symbols from `d_hat`.
pub fn demodulate_symbols(
    r: &DualPolWaveform,
    d_hat: usize,
    params: &OfdmParams,
    n_symbols: usize,
) -> Result<SubcarrierGrid> {
    let l = params.symbol_len();
    let needed = d_hat + n_symbols * l;
    if r.len() < needed {
        return Err(Error::Range {
            needed,
            available: r.len(),
        });
    }
    let dft = Dft::new(params.n_fft);
    let demod = |s: &[Complex64]| -> SymbolGrid {
        (0..n_symbols)
            .map(|k| {
                let start = d_hat + k * l + params.n_cp;
                dft.forward(&s[start..start + params.n_fft])
            })
            .collect()
    };
    Ok(SubcarrierGrid {
        x: demod(&r.x),
        y: demod(&r.y),
    })
}

fn det(m: &Jones) -> Complex64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

fn inverse(m: &Jones) -> Option<Jones> {
    let d = det(m);
    if d.norm() == 0.0 || !d.is_finite() {
        return None;
    }
    Some([[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]])
}

fn mul(a: &Jones, b: &Jones) -> Jones {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][0] * b[0][j] + a[i][1] * b[1][j]))
}

/// Ratio of singular values of a 2x2 matrix.
pub fn condition_number(m: &Jones) -> f64 {
    let fro: f64 = m.iter().flatten().map(|v| v.norm_sqr()).sum();
    let d = det(m).norm_sqr();
    let disc = (fro * fro - 4.0 * d).max(0.0).sqrt();
    let (s1, s2) = ((fro + disc) / 2.0, (fro - disc) / 2.0);
    if s2 <= 0.0 {
        f64::INFINITY
    } else {
        (s1 / s2).sqrt()
    }
}

/// Solves `Y = H·S` per occupied subcarrier, with `S` the transmitted
/// training spectra (columns are symbols, rows polarizations).
pub fn estimate_channel(
    rx_training: &SubcarrierGrid,
    training: &TrainingSet,
    params: &OfdmParams,
) -> Result<ChannelEstimate> {
    if rx_training.n_symbols() < 2 {
        return Err(Error::InsufficientData("two training symbols required".into()));
    }
    let pl = &training.placement;
    let mut est = ChannelEstimate {
        h: Vec::new(),
        condition: Vec::new(),
        usable: Vec::new(),
    };
    for &b in &params.occupied_bins() {
        let y: Jones = [
            [rx_training.x[0][b], rx_training.x[1][b]],
            [rx_training.y[0][b], rx_training.y[1][b]],
        ];
        let s: Jones = [[pl[0][0][b], pl[1][0][b]], [pl[0][1][b], pl[1][1][b]]];
        match inverse(&s) {
            Some(si) => {
                let h = mul(&y, &si);
                est.condition.push(condition_number(&h));
                est.usable.push(h.iter().flatten().all(|v| v.is_finite()));
                est.h.push(h);
            }
            None => {
                est.h.push([[ZERO; 2]; 2]);
                est.condition.push(f64::INFINITY);
                est.usable.push(false);
            }
        }
    }
    Ok(est)
}

/// Averages each estimate with its neighbours within `half_width` bins on
/// the same side of DC.
pub fn smooth_channel(est: &ChannelEstimate, half_width: usize) -> ChannelEstimate {
    if half_width == 0 {
        return est.clone();
    }
    let n = est.h.len();
    let mid = n / 2;
    let mut out = est.clone();
    for j in 0..n {
        let (side_lo, side_hi) = if j < mid { (0, mid) } else { (mid, n) };
        let lo = j.saturating_sub(half_width).max(side_lo);
        let hi = (j + half_width + 1).min(side_hi);
        let mut acc = [[ZERO; 2]; 2];
        let mut count = 0.0;
        for i in lo..hi {
            if est.usable[i] {
                for (a, v) in acc.iter_mut().flatten().zip(est.h[i].iter().flatten()) {
                    *a += v;
                }
                count += 1.0;
            }
        }
        if count > 0.0 {
            acc.iter_mut().flatten().for_each(|v| *v /= count);
            out.h[j] = acc;
            out.condition[j] = condition_number(&acc);
        }
    }
    out
}

/// Zero-forcing on occupied subcarriers; subcarriers whose condition number
/// exceeds `cond_threshold` are marked unusable and left unequalized.
pub fn equalize(
    grid: &SubcarrierGrid,
    est: &ChannelEstimate,
    params: &OfdmParams,
    cond_threshold: f64,
) -> Result<(SubcarrierGrid, Vec<bool>)> {
    let bins = params.occupied_bins();
    if est.h.len() != bins.len() {
        return Err(Error::Length {
            expected: bins.len(),
            actual: est.h.len(),
        });
    }
    let mut out = grid.clone();
    let mut usable = Vec::with_capacity(bins.len());
    for (j, &b) in bins.iter().enumerate() {
        let ok = est.usable[j] && est.condition[j] <= cond_threshold;
        usable.push(ok);
        if !ok {
            continue;
        }
        let hi = inverse(&est.h[j])
            .ok_or_else(|| Error::Numeric(format!("singular channel on bin {b}")))?;
        for s in 0..grid.n_symbols() {
            let (u, v) = (grid.x[s][b], grid.y[s][b]);
            out.x[s][b] = hi[0][0] * u + hi[0][1] * v;
            out.y[s][b] = hi[1][0] * u + hi[1][1] * v;
        }
    }
    Ok((out, usable))
}

/// Removes a common rotation per symbol, tracked cumulatively and estimated
/// jointly over both polarizations from hard decisions. Returns the
/// accumulated phase after each symbol.
pub fn correct_common_phase(grid: &mut SubcarrierGrid, usable: &[bool], params: &OfdmParams) -> Vec<f64> {
    let bins: Vec<usize> = params
        .occupied_bins()
        .into_iter()
        .zip(usable)
        .filter_map(|(b, &u)| u.then_some(b))
        .collect();
    let mut acc = 0.0;
    let mut track = Vec::with_capacity(grid.n_symbols());
    for s in 0..grid.n_symbols() {
        let rot = Complex64::from_polar(1.0, -acc);
        let mut corr = ZERO;
        for &b in &bins {
            for row in [&mut grid.x[s], &mut grid.y[s]] {
                row[b] *= rot;
                corr += row[b] * qam::decide(row[b]).conj();
            }
        }
        let phi = corr.arg();
        let fix = Complex64::from_polar(1.0, -phi);
        for &b in &bins {
            grid.x[s][b] *= fix;
            grid.y[s][b] *= fix;
        }
        acc += phi;
        track.push(acc);
    }
    track
}

/// Hard-decision bits, x polarization first, symbol-major.
pub fn demap(grid: &SubcarrierGrid, params: &OfdmParams) -> Vec<u8> {
    let mut bits = crate::frame::demap_grid(&grid.x, params);
    bits.extend(crate::frame::demap_grid(&grid.y, params));
    bits
}

/// Everything produced by [`receive`].
#[derive(Clone, Debug)]
pub struct Reception {
    /// Equalized payload symbols.
    pub payload: SubcarrierGrid,
    pub bits: Vec<u8>,
    /// Per occupied subcarrier.
    pub usable: Vec<bool>,
    pub channel: ChannelEstimate,
    pub phase_track: Vec<f64>,
}

impl Reception {
    /// Per-bit mask matching the layout of `bits`.
    pub fn bit_mask(&self) -> Vec<bool> {
        let per_symbol: Vec<bool> = self.usable.iter().flat_map(|&u| [u; 4]).collect();
        let n = 2 * self.payload.n_symbols();
        (0..n).flat_map(|_| per_symbol.iter().copied()).collect()
    }
}

/// Demodulates a synchronized, offset-corrected frame starting at `d_hat`.
pub fn receive(
    r: &DualPolWaveform,
    d_hat: usize,
    training: &TrainingSet,
    params: &OfdmParams,
    cfg: &ReceiverConfig,
) -> Result<Reception> {
    let n_sym = 2 + params.payload_symbols;
    let grid = demodulate_symbols(r, d_hat, params, n_sym)?;
    let raw = estimate_channel(&grid.slice(0..2), training, params)?;
    let channel = smooth_channel(&raw, cfg.smoothing);
    let (mut payload, usable) = equalize(&grid.slice(2..n_sym), &channel, params, cfg.cond_threshold)?;
    let phase_track = if cfg.common_phase {
        correct_common_phase(&mut payload, &usable, params)
    } else {
        vec![0.0; payload.n_symbols()]
    };
    let bits = demap(&payload, params);
    Ok(Reception {
        payload,
        bits,
        usable,
        channel,
        phase_track,
    })
}
