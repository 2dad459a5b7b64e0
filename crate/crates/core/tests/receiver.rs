mod common;

use std::f64::consts::PI;

use coofdm::frame::demap_grid;
use coofdm::metrics::bit_errors;
use coofdm::prelude::*;
use coofdm::qam::{constellation, demap4, map4};
use coofdm::receiver::{
    demodulate_symbols, equalize, estimate_channel, ChannelEstimate, Jones, SubcarrierGrid,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::erf::erfc;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn paper(symbols: usize) -> OfdmParams {
    let mut p = OfdmParams::paper();
    p.payload_symbols = symbols;
    p
}

#[test]
fn demodulation_inverts_modulation() {
    let p = paper(3);
    let (t, bits, w) = common::frame(&p, 6);
    let g = demodulate_symbols(&w, 0, &p, 5).unwrap();
    let grids = map_dual_payload(&bits, &p).unwrap();
    for s in 0..5 {
        for (pol, got) in [&g.x[s], &g.y[s]].into_iter().enumerate() {
            let want = if s < 2 { &t.placement[s][pol] } else { &grids[pol][s - 2] };
            let err = got.iter().zip(want).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(err < 1e-9, "symbol {s} pol {pol}: {err}");
        }
    }
    let p52 = paper(50);
    let (_, _, w52) = common::frame(&p52, 6);
    assert_eq!(w52.len(), 52 * 558);
    assert!(demodulate_symbols(&w52, 0, &p52, 52).is_ok());
    assert!(demodulate_symbols(&w52, 1, &p52, 52).is_err());
}

#[test]
fn early_window_gives_linear_phase() {
    let p = paper(1);
    let (_, _, w) = common::frame(&p, 6);
    let r = apply_timing_offset(&w, 1);
    let truth = demodulate_symbols(&r, 1, &p, 3).unwrap();
    let early = demodulate_symbols(&r, 0, &p, 3).unwrap();
    let n = p.n_fft;
    for s in 0..3 {
        // independent transform of the same window
        let start = p.n_cp;
        let naive = common::naive_dft(&r.x[start + s * p.symbol_len()..start + s * p.symbol_len() + n]);
        for (k, nk) in naive.iter().enumerate() {
            let rot = Complex64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64);
            assert!((early.x[s][k] - truth.x[s][k] * rot).norm() < 1e-9);
            assert!((nk - early.x[s][k]).norm() < 1e-9);
        }
    }
}

fn training_grid(t: &TrainingSet) -> SubcarrierGrid {
    SubcarrierGrid {
        x: vec![t.placement[0][0].clone(), t.placement[1][0].clone()],
        y: vec![t.placement[0][1].clone(), t.placement[1][1].clone()],
    }
}

fn apply_jones(g: &SubcarrierGrid, h: &[Jones], p: &OfdmParams) -> SubcarrierGrid {
    let mut out = g.clone();
    for (j, &b) in p.occupied_bins().iter().enumerate() {
        for s in 0..g.n_symbols() {
            let (u, v) = (g.x[s][b], g.y[s][b]);
            out.x[s][b] = h[j][0][0] * u + h[j][0][1] * v;
            out.y[s][b] = h[j][1][0] * u + h[j][1][1] * v;
        }
    }
    out
}

fn max_jones_err(a: &[Jones], b: &[Jones]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().flatten().zip(y.iter().flatten()).map(|(u, v)| (u - v).norm()))
        .fold(0.0, f64::max)
}

#[test]
fn identity_channel_estimate() {
    let p = paper(2);
    let (t, _, w) = common::frame(&p, 6);
    let g = demodulate_symbols(&w, 0, &p, 2).unwrap();
    let est = estimate_channel(&g, &t, &p).unwrap();
    let eye: Jones = [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]];
    assert!(max_jones_err(&est.h, &vec![eye; 416]) < 1e-9);
    assert!(est.usable.iter().all(|&u| u));
}

#[test]
fn dgd_channel_estimate() {
    let p = paper(2);
    let (t, _, w) = common::frame(&p, 6);
    for alpha in [1usize, 4, 7] {
        let r = apply_dgd(&apply_timing_offset(&w, 10), alpha);
        let g = demodulate_symbols(&r, 10, &p, 2).unwrap();
        let est = estimate_channel(&g, &t, &p).unwrap();
        let want: Vec<Jones> = p
            .occupied_signed()
            .iter()
            .map(|&k| {
                let ph = Complex64::from_polar(1.0, -2.0 * PI * alpha as f64 * k as f64 / 512.0);
                [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), ph]]
            })
            .collect();
        assert!(max_jones_err(&est.h, &want) < 1e-6, "alpha {alpha}");
    }
}

fn random_jones(rng: &mut ChaCha8Rng) -> Jones {
    std::array::from_fn(|_| std::array::from_fn(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))))
}

#[test]
fn random_channel_estimate_and_equalize() {
    let p = paper(4);
    let (t, bits, _) = common::frame(&p, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let h: Vec<Jones> = (0..416).map(|_| random_jones(&mut rng)).collect();
    let est = estimate_channel(&apply_jones(&training_grid(&t), &h, &p), &t, &p).unwrap();
    assert!(max_jones_err(&est.h, &h) < 1e-6);

    let grids = map_dual_payload(&bits, &p).unwrap();
    let tx = SubcarrierGrid { x: grids[0].clone(), y: grids[1].clone() };
    let exact = ChannelEstimate { h: h.clone(), condition: vec![1.0; 416], usable: vec![true; 416] };
    let (eq, usable) = equalize(&apply_jones(&tx, &h, &p), &exact, &p, 1e6).unwrap();
    assert!(usable.iter().all(|&u| u));
    for b in p.occupied_bins() {
        for s in 0..4 {
            assert!((eq.x[s][b] - tx.x[s][b]).norm() < 1e-6);
            assert!((eq.y[s][b] - tx.y[s][b]).norm() < 1e-6);
        }
    }
}

#[test]
fn ill_conditioned_bins_are_excluded() {
    let p = paper(1);
    let g = SubcarrierGrid { x: vec![vec![c(1.0, 0.0); 512]], y: vec![vec![c(1.0, 0.0); 512]] };
    let singular = ChannelEstimate {
        h: vec![[[c(1.0, 0.0); 2]; 2]; 416],
        condition: vec![f64::INFINITY; 416],
        usable: vec![true; 416],
    };
    let (_, usable) = equalize(&g, &singular, &p, 1e6).unwrap();
    assert!(usable.iter().all(|&u| !u));
}

#[test]
fn adjacent_decision_region_costs_one_bit() {
    let pts = constellation();
    let step = 2.0 / 10f64.sqrt();
    for label in 0..16u8 {
        let bits: Vec<u8> = (0..4).map(|i| (label >> (3 - i)) & 1).collect();
        let z = map4(&bits);
        assert!(pts.contains(&z));
        for d in [c(step, 0.0), c(-step, 0.0), c(0.0, step), c(0.0, -step)] {
            let moved = z + d;
            if moved.re.abs() > 1.0 || moved.im.abs() > 1.0 {
                continue;
            }
            let mut out = Vec::new();
            demap4(moved, &mut out);
            assert_eq!(out.iter().zip(&bits).filter(|(a, b)| a != b).count(), 1);
        }
    }
}

fn q(x: f64) -> f64 {
    0.5 * erfc(x / 2f64.sqrt())
}

/// Gray 16-QAM bit error rate on levels ±1, ±3 with per-dimension noise variance 5/SNR.
fn qam16_ber(snr_db: f64) -> f64 {
    let snr = 10f64.powf(snr_db / 10.0);
    let s = (5.0 / snr).sqrt();
    (3.0 * q(1.0 / s) + 2.0 * q(3.0 / s) - q(5.0 / s)) / 4.0
}

fn simulated_ber(snr_db: f64, n_bits: usize, seed: u64) -> f64 {
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigma = (0.5 / 10f64.powf(snr_db / 10.0)).sqrt();
    let mut errors = 0usize;
    let mut out = Vec::with_capacity(4);
    for _ in 0..n_bits / 4 {
        let bits: [u8; 4] = std::array::from_fn(|_| rng.random_range(0..2u8));
        let n = c(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)) * sigma;
        out.clear();
        demap4(map4(&bits) + n, &mut out);
        errors += out.iter().zip(&bits).filter(|(a, b)| a != b).count();
    }
    errors as f64 / n_bits as f64
}

#[test]
fn awgn_ber_matches_closed_form() {
    // 20 dB leaves a few errors per million bits, so the count is grown until the
    // estimate is statistically meaningful
    for (snr, bits) in [(20.0, 80_000_000), (14.0, 4_000_000), (10.0, 1_000_000)] {
        let sim = simulated_ber(snr, bits, 9);
        let exact = qam16_ber(snr);
        assert!((sim / exact - 1.0).abs() < 0.3, "{snr} dB: {sim:e} vs {exact:e}");
    }
}

#[test]
fn identity_chain_has_no_errors() {
    let p = paper(6);
    let (t, bits, r) = common::received(&p, 17, &ChannelConfig { delay_samples: 444, ..Default::default() });
    let s = synchronize(&r, &p, &t, &SyncConfig::default()).unwrap();
    let rx = receive(&apply_corrections(&r, &s).unwrap(), s.d_hat_x, &t, &p, &ReceiverConfig::default()).unwrap();
    assert_eq!(rx.bits, bits);
    assert_eq!(bit_errors(&bits, &rx.bits, Some(&rx.bit_mask())).unwrap(), (0, bits.len() as u64));
}

#[test]
fn impaired_noiseless_chain_has_no_errors() {
    let p = paper(8);
    let ch = ChannelConfig { delay_samples: 1000, dgd_samples: 5, cfo_hz: 2.5e9, sco_ppm: 160.0, ..Default::default() };
    let (t, bits, r) = common::received(&p, 4, &ch);
    let cfg = SyncConfig { alpha: AlphaPolicy::Fixed(5), ..Default::default() };
    let s = synchronize(&r, &p, &t, &cfg).unwrap();
    let rx = receive(&apply_corrections(&r, &s).unwrap(), s.d_hat_x, &t, &p, &ReceiverConfig::default()).unwrap();
    assert_eq!(rx.bits, bits);
}

/// Phase slope across subcarriers of each equalized payload symbol.
fn per_symbol_slopes(compensate: bool) -> Vec<f64> {
    let p = paper(20);
    let ch = ChannelConfig { delay_samples: 300, sco_ppm: 160.0, ..Default::default() };
    let (t, bits, r) = common::received(&p, 4, &ch);
    let cfg = SyncConfig { sco_compensation: compensate, ..Default::default() };
    let s = synchronize(&r, &p, &t, &cfg).unwrap();
    let rcfg = ReceiverConfig { common_phase: false, ..Default::default() };
    let rx = receive(&apply_corrections(&r, &s).unwrap(), s.d_hat_x, &t, &p, &rcfg).unwrap();
    let tx = map_dual_payload(&bits, &p).unwrap();
    let ks = p.occupied_signed();
    (0..20)
        .map(|sym| {
            let (mut sxy, mut sxx) = (0.0, 0.0);
            for (&k, &b) in ks.iter().zip(&p.occupied_bins()) {
                let ph = (rx.payload.x[sym][b] / tx[0][sym][b]).arg();
                sxy += k as f64 * ph;
                sxx += (k * k) as f64;
            }
            sxy / sxx
        })
        .collect()
}

#[test]
fn uncompensated_clock_offset_spirals() {
    let raw = per_symbol_slopes(false);
    let fixed = per_symbol_slopes(true);
    // rotation grows with symbol index until it wraps; compare the first few
    assert!(raw[3].abs() > 2.0 * raw[0].abs().max(1e-4), "{raw:?}");
    assert!(fixed[3].abs() < 0.25 * raw[3].abs(), "{fixed:?}");
}

#[test]
fn demap_grid_round_trip() {
    let p = paper(3);
    let bits = random_bits(1, 4 * 416 * 3);
    let g = map_payload(&bits, &p).unwrap();
    assert_eq!(demap_grid(&g, &p), bits);
}
