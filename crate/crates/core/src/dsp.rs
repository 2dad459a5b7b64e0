//! Unitary DFT helpers and phase rotation.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Forward and inverse N-point transforms, both scaled by 1/sqrt(N).
#[derive(Clone)]
pub struct Dft {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl Dft {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
            scale: 1.0 / (n as f64).sqrt(),
        }
    }

    pub fn len(&self) -> usize {
        self.fwd.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn forward(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut buf = x.to_vec();
        self.fwd.process(&mut buf);
        buf.iter_mut().for_each(|v| *v *= self.scale);
        buf
    }

    pub fn inverse(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut buf = x.to_vec();
        self.inv.process(&mut buf);
        buf.iter_mut().for_each(|v| *v *= self.scale);
        buf
    }
}

/// Multiplies `x[n]` by `exp(j·2π·f·(n + offset))`, `f` in cycles per sample.
pub fn rotate(x: &mut [Complex64], f: f64, offset: usize) {
    if f == 0.0 {
        return;
    }
    for (n, v) in x.iter_mut().enumerate() {
        // reduce the cycle count first so the phase stays accurate on long streams
        let cyc = (f * (n + offset) as f64).fract();
        *v *= Complex64::from_polar(1.0, 2.0 * PI * cyc);
    }
}

pub fn energy(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum()
}

pub fn mean_power(x: &[Complex64]) -> f64 {
    if x.is_empty() {
        0.0
    } else {
        energy(x) / x.len() as f64
    }
}

/// Prepends the last `n_cp` samples.
pub fn add_cp(x: &[Complex64], n_cp: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(x.len() + n_cp);
    out.extend_from_slice(&x[x.len() - n_cp..]);
    out.extend_from_slice(x);
    out
}

/// Wraps a phase into (-π, π].
pub fn wrap_phase(p: f64) -> f64 {
    let mut q = p.rem_euclid(2.0 * PI);
    if q > PI {
        q -= 2.0 * PI;
    }
    q
}
