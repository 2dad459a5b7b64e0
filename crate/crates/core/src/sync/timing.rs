//! Golay/Alamouti timing metric and frame-start decision.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::DualPolWaveform;
use crate::params::OfdmParams;

/// Metric values over a contiguous range of candidate starts.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimingMetricTrace {
    pub values: Vec<f64>,
    /// Inclusive `[d_min, d_max]`.
    pub search_range: (usize, usize),
    pub peak_index: usize,
    pub peak_value: f64,
}

impl TimingMetricTrace {
    /// Builds a trace and locates its peak (lowest index on ties).
    pub fn from_values(values: Vec<f64>, d_min: usize) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InsufficientData("empty timing trace".into()));
        }
        let (mut best, mut best_v) = (0usize, values[0]);
        for (i, &v) in values.iter().enumerate().skip(1) {
            if v > best_v {
                best = i;
                best_v = v;
            }
        }
        Ok(Self {
            search_range: (d_min, d_min + values.len() - 1),
            peak_index: d_min + best,
            peak_value: best_v,
            values,
        })
    }

    pub fn value_at(&self, d: usize) -> Option<f64> {
        d.checked_sub(self.search_range.0)
            .and_then(|i| self.values.get(i).copied())
    }
}

/// Denominator of the timing metric.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricNorm {
    /// `(2·Σ|r_x(d+n)|²)²`: the reference window's energy only. Unbounded
    /// when that window is nearly silent but the partner samples are not,
    /// e.g. just ahead of a frame preceded by a quiet gap.
    Literal,
    /// Product of the energies entering each side of the products
    /// (first-symbol windows of both polarizations times the second-symbol
    /// windows). Equal to `Literal` on a balanced frame at the true start and
    /// bounded by 1 everywhere.
    #[default]
    Balanced,
}

/// Peak position, or `None` when the peak is below `threshold`.
pub fn estimate_frame_start(trace: &TimingMetricTrace, threshold: f64) -> Option<usize> {
    (trace.peak_value >= threshold).then_some(trace.peak_index)
}

#[inline]
fn at(s: &[Complex64], i: isize) -> Complex64 {
    if i >= 0 && (i as usize) < s.len() {
        s[i as usize]
    } else {
        Complex64::new(0.0, 0.0)
    }
}

/// Per-`n` differences `P^A(n) - P^B(n)` at candidate `d`.
///
/// `a` is the reference polarization and `b` the partner, offset by `alpha`.
/// For the x metric `a = r_x, b = r_y, alpha = α`; the y metric swaps the
/// streams and negates `alpha`.
pub fn metric_terms(
    a: &[Complex64],
    b: &[Complex64],
    d: usize,
    alpha: isize,
    pn: &[f64],
    params: &OfdmParams,
) -> Vec<Complex64> {
    let (n_fft, n_cp) = (params.n_fft as isize, params.n_cp as isize);
    let d = d as isize;
    (0..params.symbol_len() as isize)
        .map(|n| {
            let part = d + n_fft + 2 * n_cp + (n_cp - n).rem_euclid(n_fft);
            let w = pn[n as usize];
            let pa = at(a, d + n) * w * at(b, alpha + part);
            let pb = at(b, d + alpha + n) * w * at(a, part);
            pa - pb
        })
        .collect()
}

fn metric_value(
    a: &[Complex64],
    b: &[Complex64],
    d: usize,
    alpha: isize,
    pn: &[f64],
    params: &OfdmParams,
    norm: MetricNorm,
) -> f64 {
    let (n_fft, n_cp) = (params.n_fft as isize, params.n_cp as isize);
    let di = d as isize;
    let mut sum = Complex64::new(0.0, 0.0);
    let (mut ea1, mut eb1, mut ea2, mut eb2) = (0.0, 0.0, 0.0, 0.0);
    for n in 0..params.symbol_len() as isize {
        let part = di + n_fft + 2 * n_cp + (n_cp - n).rem_euclid(n_fft);
        let (a1, b2) = (at(a, di + n), at(b, alpha + part));
        let (b1, a2) = (at(b, di + alpha + n), at(a, part));
        sum += (a1 * b2 - b1 * a2) * pn[n as usize];
        ea1 += a1.norm_sqr();
        eb1 += b1.norm_sqr();
        ea2 += a2.norm_sqr();
        eb2 += b2.norm_sqr();
    }
    let den = match norm {
        MetricNorm::Literal => (2.0 * ea1).powi(2),
        MetricNorm::Balanced => (ea1 + eb1) * (ea2 + eb2),
    };
    if den == 0.0 {
        return 0.0;
    }
    sum.norm_sqr() / den
}

fn check_inputs(
    r: &DualPolWaveform,
    params: &OfdmParams,
    pn: &[f64],
    alpha: usize,
    range: (usize, usize),
) -> Result<()> {
    if pn.len() != params.symbol_len() {
        return Err(Error::Length {
            expected: params.symbol_len(),
            actual: pn.len(),
        });
    }
    if range.0 > range.1 {
        return Err(Error::Param(format!(
            "empty search range [{}, {}]",
            range.0, range.1
        )));
    }
    let needed = range.1 + 2 * params.symbol_len() + alpha;
    if r.len() < needed {
        return Err(Error::Range {
            needed,
            available: r.len(),
        });
    }
    Ok(())
}

/// x-polarization metric over `search_range` (inclusive), with the
/// reference-window denominator.
pub fn timing_metric(
    r: &DualPolWaveform,
    params: &OfdmParams,
    pn: &[f64],
    alpha_hint: usize,
    search_range: (usize, usize),
) -> Result<TimingMetricTrace> {
    timing_metric_with(r, params, pn, alpha_hint, search_range, MetricNorm::Literal)
}

pub fn timing_metric_with(
    r: &DualPolWaveform,
    params: &OfdmParams,
    pn: &[f64],
    alpha_hint: usize,
    search_range: (usize, usize),
    norm: MetricNorm,
) -> Result<TimingMetricTrace> {
    check_inputs(r, params, pn, alpha_hint, search_range)?;
    let values = (search_range.0..=search_range.1)
        .map(|d| metric_value(&r.x, &r.y, d, alpha_hint as isize, pn, params, norm))
        .collect();
    TimingMetricTrace::from_values(values, search_range.0)
}

/// y-polarization metric: the x metric with the streams swapped. Its peak
/// sits at the y frame start, `α` samples after the x start.
pub fn timing_metric_y(
    r: &DualPolWaveform,
    params: &OfdmParams,
    pn: &[f64],
    alpha_hint: usize,
    search_range: (usize, usize),
    norm: MetricNorm,
) -> Result<TimingMetricTrace> {
    check_inputs(r, params, pn, 0, search_range)?;
    let values = (search_range.0..=search_range.1)
        .map(|d| metric_value(&r.y, &r.x, d, -(alpha_hint as isize), pn, params, norm))
        .collect();
    TimingMetricTrace::from_values(values, search_range.0)
}

/// Cyclic-prefix consistency of the symbols starting at `start`: normalized
/// correlation between each prefix and the tail it copies, averaged over
/// `n_symbols` symbols.
pub fn cp_consistency(s: &[Complex64], start: usize, n_symbols: usize, params: &OfdmParams) -> f64 {
    let (n_fft, n_cp, l) = (params.n_fft, params.n_cp, params.symbol_len());
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 0..n_symbols {
        let base = start + k * l;
        if base + l > s.len() {
            break;
        }
        let mut c = Complex64::new(0.0, 0.0);
        for i in 0..n_cp {
            let (u, v) = (s[base + i], s[base + i + n_fft]);
            c += u * v.conj();
            den += 0.5 * (u.norm_sqr() + v.norm_sqr());
        }
        num += c.norm();
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}
