#![allow(dead_code)]

use coofdm::prelude::*;
use num_complex::Complex64;

pub fn frame(params: &OfdmParams, seed: u64) -> (TrainingSet, Vec<u8>, DualPolWaveform) {
    let t = build_training_symbols(params, DEFAULT_PN_SEED).unwrap();
    let bits = random_bits(seed, frame_bits(params));
    let w = modulate_frame(&t, &map_dual_payload(&bits, params).unwrap(), params).unwrap();
    (t, bits, w)
}

/// Frame through `ch` with a short zero tail.
pub fn received(params: &OfdmParams, seed: u64, ch: &ChannelConfig) -> (TrainingSet, Vec<u8>, DualPolWaveform) {
    let (t, bits, w) = frame(params, seed);
    let mut r = run_channel(&w, ch).unwrap();
    r.pad_tail(64);
    (t, bits, r)
}

/// Direct O(N²) DFT with unitary scaling.
pub fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    let s = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(i, v)| v * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * (k * i) as f64 / n as f64))
                .sum::<Complex64>()
                * s
        })
        .collect()
}

pub fn max_abs(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm()).fold(0.0, f64::max)
}
