//! Fractional-rate interpolation with a Kaiser-windowed sinc kernel.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Kernel support in input samples.
pub const TAPS: usize = 32;
const HALF: i64 = (TAPS / 2) as i64;
const PHASES: usize = 1024;
const BETA: f64 = 8.0;

/// Largest relative rate offset accepted by the resamplers.
pub const MAX_GAMMA: f64 = 1e-2;

fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let q = x * x / 4.0;
    for k in 1..200 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

fn kernel(x: f64) -> f64 {
    let r = x / HALF as f64;
    if r.abs() >= 1.0 {
        return 0.0;
    }
    let sinc = if x == 0.0 { 1.0 } else { (PI * x).sin() / (PI * x) };
    sinc * bessel_i0(BETA * (1.0 - r * r).sqrt()) / bessel_i0(BETA)
}

/// Row `p` holds the taps for fractional offset `p / PHASES`; one extra row
/// closes the interval so linear blending never wraps.
fn table() -> &'static Vec<[f64; TAPS]> {
    static TABLE: OnceLock<Vec<[f64; TAPS]>> = OnceLock::new();
    TABLE.get_or_init(|| {
        (0..=PHASES)
            .map(|p| {
                let mu = p as f64 / PHASES as f64;
                std::array::from_fn(|j| kernel((j as i64 - HALF + 1) as f64 - mu))
            })
            .collect()
    })
}

/// Value of `sig` at fractional position `t`; samples outside the stream are zero.
pub fn interpolate_at(sig: &[Complex64], t: f64) -> Complex64 {
    let tab = table();
    let i0 = t.floor();
    let pos = (t - i0) * PHASES as f64;
    let p = (pos.floor() as usize).min(PHASES - 1);
    let frac = pos - p as f64;
    let (lo, hi) = (&tab[p], &tab[p + 1]);
    let base = i0 as i64 - HALF + 1;
    let mut acc = Complex64::new(0.0, 0.0);
    let n = sig.len() as i64;
    let j_start = (-base).max(0) as usize;
    let j_end = ((n - base).min(TAPS as i64)).max(0) as usize;
    for j in j_start..j_end {
        let w = lo[j] + frac * (hi[j] - lo[j]);
        acc += sig[(base + j as i64) as usize] * w;
    }
    acc
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !gamma.is_finite() || gamma.abs() >= MAX_GAMMA {
        return Err(Error::Param(format!(
            "rate offset {gamma:e} outside ±{MAX_GAMMA:e}"
        )));
    }
    Ok(())
}

/// Sampling with a clock running `1 + gamma` times slower than the source grid:
/// `y[m] = x(m·(1+gamma))`.
pub fn stretch(sig: &[Complex64], gamma: f64) -> Result<Vec<Complex64>> {
    check_gamma(gamma)?;
    if gamma == 0.0 || sig.is_empty() {
        return Ok(sig.to_vec());
    }
    let ratio = 1.0 + gamma;
    let m = ((sig.len() - 1) as f64 / ratio).floor() as usize + 1;
    Ok((0..m).map(|i| interpolate_at(sig, i as f64 * ratio)).collect())
}

/// Inverse of [`stretch`]: `z[m] = r(m / (1+gamma))`.
pub fn unstretch(sig: &[Complex64], gamma: f64) -> Result<Vec<Complex64>> {
    check_gamma(gamma)?;
    if gamma == 0.0 || sig.is_empty() {
        return Ok(sig.to_vec());
    }
    let ratio = 1.0 + gamma;
    let m = ((sig.len() - 1) as f64 * ratio).floor() as usize + 1;
    Ok((0..m).map(|i| interpolate_at(sig, i as f64 / ratio)).collect())
}
