//! One line per acceptance criterion, written straight to stderr so it shows
//! up without `--nocapture`.

use std::io::Write;
use std::process::Command;
use std::time::Instant;

use coofdm::dsp::Dft;
use coofdm::golay::{golay_parent, golay_pair};
use coofdm::harness::{run_penalty_table, run_point, ScenarioConfig, SweepField};
use coofdm::prelude::*;
use coofdm::receiver::{estimate_channel, Jones, SubcarrierGrid};
use coofdm::sync::{
    estimate_integer_cfo, estimate_sco, resample, slope_from_gamma, timing_metric_with, MetricNorm, ScoEstimate,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TARGET_BER: f64 = 1.8e-2;

fn line(name: &str, pass: bool, detail: String) -> bool {
    let tag = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "[acceptance] {tag} {name}: {detail}");
    pass
}

fn paper(symbols: usize) -> OfdmParams {
    let mut p = OfdmParams::paper();
    p.payload_symbols = symbols;
    p
}

fn received(p: &OfdmParams, seed: u64, ch: &ChannelConfig) -> (TrainingSet, Vec<u8>, DualPolWaveform) {
    let t = build_training_symbols(p, DEFAULT_PN_SEED).unwrap();
    let bits = random_bits(seed, frame_bits(p));
    let w = modulate_frame(&t, &map_dual_payload(&bits, p).unwrap(), p).unwrap();
    let mut r = run_channel(&w, ch).unwrap();
    r.pad_tail(64);
    (t, bits, r)
}

#[test]
fn golay_complementarity() {
    let start = Instant::now();
    let mut ok = true;
    for k in 1..=9 {
        let (a, b) = golay_parent(k).unwrap();
        let n = a.len();
        for lag in 0..n {
            let s: i64 = (0..n - lag).map(|i| (a[i] * a[i + lag] + b[i] * b[i + lag]) as i64).sum();
            ok &= s == if lag == 0 { 2 * n as i64 } else { 0 };
        }
    }
    ok &= golay_pair(9, 416).is_ok();
    let secs = start.elapsed().as_secs_f64();
    assert!(line(
        "golay_complementarity",
        ok && secs < 1.0,
        format!("lengths 2..512 exact in integers, {secs:.3} s"),
    ));
}

/// Stress scenario trials shared by the frame and CFO criteria.
fn stress_points() -> Vec<(f64, coofdm::harness::SweepRow)> {
    static CACHE: std::sync::OnceLock<Vec<(f64, coofdm::harness::SweepRow)>> = std::sync::OnceLock::new();
    CACHE
        .get_or_init(|| {
            let mut cfg = ScenarioConfig { name: "stress".into(), trials: 1000, master_seed: 2024, ..Default::default() };
            cfg.params.payload_symbols = 2;
            cfg.delay_range = Some((0, 5000));
            cfg.channel.cfo_hz = 2.5e9;
            cfg.channel.sco_ppm = 160.0;
            [12.0, 15.0, 18.0, 21.0]
                .iter()
                .map(|&o| {
                    let mut c = cfg.clone();
                    c.channel.osnr_db = Some(o);
                    let (row, _) = run_point(&c).unwrap();
                    (o, row)
                })
                .collect()
        })
        .clone()
}

#[test]
fn frame_sync_robustness() {
    let pts = stress_points();
    let ok = pts
        .iter()
        .all(|(o, r)| if *o >= 15.0 { r.frame_errors == 0 } else { r.frame_error_rate <= 1e-3 });
    let detail: Vec<String> = pts.iter().map(|(o, r)| format!("{o} dB: {}/{}", r.frame_errors, r.trials)).collect();
    assert!(line(
        "frame_sync_robustness",
        ok,
        format!("frame errors {}", detail.join(", ")),
    ));
}

#[test]
fn cfo_accuracy() {
    let pts = stress_points();
    let ok = pts.iter().all(|(_, r)| r.cfo_mse <= 6.7e-3);
    let detail: Vec<String> = pts
        .iter()
        .map(|(o, r)| format!("{o} dB: mse {:.2e}, max {:.2} MHz", r.cfo_mse, r.cfo_max_abs_err_hz / 1e6))
        .collect();
    assert!(line("cfo_accuracy", ok, detail.join("; ")));
}

#[test]
fn integer_cfo_exactness() {
    let p = paper(0);
    let mut wrong = Vec::new();
    for q in -60i64..=60 {
        let ch = ChannelConfig { delay_samples: 37, cfo_hz: q as f64 * p.subcarrier_spacing_hz(), ..Default::default() };
        let (t, _, r) = received(&p, 1, &ch);
        if estimate_integer_cfo(&r.x, 37, &t, &p, 64).unwrap().q != q {
            wrong.push(q);
        }
    }
    assert!(line("integer_cfo_exactness", wrong.is_empty(), format!("121 shifts, mismatches {wrong:?}")));
}

#[test]
fn sco_estimation() {
    let p = paper(4);
    let ch = ChannelConfig { delay_samples: 1000, sco_ppm: 160.0, ..Default::default() };
    let (t, _, r) = received(&p, 3, &ch);
    let dft = Dft::new(p.n_fft);
    let s = 1000 + p.symbol_len() + p.n_cp;
    let (fx, fy) = (dft.forward(&r.x[s..s + 512]), dft.forward(&r.y[s..s + 512]));
    let fit = estimate_sco(&[&fx, &fy], &[&t.placement[1][0], &t.placement[1][1]], &p).unwrap();
    let expected = slope_from_gamma(160e-6, &p);
    let slope_err = (fit.slope_m / expected - 1.0).abs();

    let res = synchronize(&r, &p, &t, &SyncConfig::default()).unwrap();
    let sco: ScoEstimate = res.sco.unwrap();
    let residual_ppm = (sco.gamma * 1e6 - 160.0).abs();

    let slope_ok = line(
        "sco_estimation/slope",
        slope_err <= 0.02,
        format!("slope {:.4e} vs {expected:.4e} rad/subcarrier ({:.1}% off)", fit.slope_m, 100.0 * slope_err),
    );
    let r2_ok = line("sco_estimation/r_squared", fit.r_squared > 0.99, format!("R² {:.5}", fit.r_squared));
    let loop_ok = line(
        "sco_estimation/loop",
        residual_ppm < 2.0 && sco.iterations <= 3,
        format!("{} iterations, |γ̂ - γ| = {residual_ppm:.3} ppm", sco.iterations),
    );
    assert!(slope_ok && r2_ok && loop_ok);
}

#[test]
fn sco_compensation_impact() {
    let start = Instant::now();
    let mut cfg = ScenarioConfig { name: "sco".into(), trials: 20, master_seed: 7, ..Default::default() };
    cfg.channel.delay_samples = 700;
    cfg.channel.sco_ppm = 160.0;
    cfg.channel.osnr_db = Some(20.0);
    let (comp, _) = run_point(&cfg).unwrap();
    cfg.sync.sco_compensation = false;
    let (raw, _) = run_point(&cfg).unwrap();
    let ok = raw.ber > 1e-1 && comp.ber < 5e-3;
    assert!(line(
        "sco_compensation_impact",
        ok,
        format!(
            "BER uncompensated {:.3e}, compensated {:.3e} ({} errors / {} bits, {:.0} s)",
            raw.ber,
            comp.ber,
            comp.bit_errors,
            comp.bits,
            start.elapsed().as_secs_f64()
        ),
    ));
}

#[test]
fn dgd_tolerance() {
    let start = Instant::now();
    let mut cfg = ScenarioConfig { name: "dgd".into(), trials: 8, master_seed: 99, ..Default::default() };
    cfg.channel.cfo_hz = 2.5e9;
    cfg.channel.sco_ppm = 160.0;
    cfg.channel.delay_samples = 500;
    cfg.min_bit_errors = Some(100);
    let osnr: Vec<f64> = (13..=19).map(f64::from).collect();
    let (rows, curves) = run_penalty_table(&cfg, SweepField::DgdSamples, &[0.0, 7.0], &osnr, TARGET_BER).unwrap();
    let min_errors = curves.iter().flat_map(|(_, pts)| pts.iter().map(|r| r.bit_errors)).min().unwrap();
    let penalty = rows[1].penalty_db;
    let ok = penalty.is_some_and(|p| p <= 1.0) && min_errors >= 100;
    assert!(line(
        "dgd_tolerance",
        ok,
        format!(
            "R-OSNR {:?} / {:?} dB, penalty {:?} dB, min errors per point {min_errors} ({:.0} s)",
            rows[0].r_osnr_db,
            rows[1].r_osnr_db,
            penalty,
            start.elapsed().as_secs_f64()
        ),
    ));
}

fn metric_properties(cases: usize) -> (usize, usize) {
    let p = OfdmParams::small();
    let t = build_training_symbols(&p, DEFAULT_PN_SEED).unwrap();
    let pn = t.metric_weights();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let (mut shift_fail, mut scale_fail) = (0, 0);
    for case in 0..cases {
        let d0 = rng.random_range(0..60);
        let k = rng.random_range(1..40);
        let norm = if case % 2 == 0 { MetricNorm::Balanced } else { MetricNorm::Literal };
        let (_, _, r) = received(&p, case as u64, &ChannelConfig { delay_samples: d0, ..Default::default() });
        let a = timing_metric_with(&r, &p, &pn, 0, (0, 80), norm).unwrap();
        let b = timing_metric_with(&apply_timing_offset(&r, k), &p, &pn, 0, (0, 80 + k), norm).unwrap();
        if a.peak_index != d0 || b.peak_index != d0 + k {
            shift_fail += 1;
        }
        let c = Complex64::from_polar(10f64.powf(rng.random_range(-3.0..3.0)), rng.random_range(-3.0..3.0));
        let scaled = DualPolWaveform::new(
            r.x.iter().map(|v| v * c).collect(),
            r.y.iter().map(|v| v * c).collect(),
            r.sample_rate_hz,
        )
        .unwrap();
        let u = timing_metric_with(&r, &p, &pn, 0, (d0, d0 + 20), norm).unwrap();
        let v = timing_metric_with(&scaled, &p, &pn, 0, (d0, d0 + 20), norm).unwrap();
        if u.values.iter().zip(&v.values).any(|(x, y)| (x - y).abs() > 1e-9 * x.abs().max(1e-12)) {
            scale_fail += 1;
        }
    }
    (shift_fail, scale_fail)
}

fn slope_invariant_error() -> f64 {
    let p = paper(0);
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let g = (i as f64 - 500.0) * 1.3e-7;
        let e = ScoEstimate::from_history(vec![g, -0.3 * g, 0.07 * g], &p);
        let lhs = e.gamma * 2.0 * std::f64::consts::PI * 2.0 * 558.0;
        let rhs = e.slope_m * 512.0;
        if rhs != 0.0 {
            worst = worst.max((lhs - rhs).abs() / rhs.abs());
        }
    }
    worst
}

fn identity_chain_errors() -> usize {
    let p = paper(10);
    let (t, bits, r) = received(&p, 5, &ChannelConfig { delay_samples: 123, ..Default::default() });
    let s = synchronize(&r, &p, &t, &SyncConfig::default()).unwrap();
    let rx = receive(&apply_corrections(&r, &s).unwrap(), s.d_hat_x, &t, &p, &ReceiverConfig::default()).unwrap();
    bits.iter().zip(&rx.bits).filter(|(a, b)| a != b).count()
}

fn estimator_error() -> f64 {
    let p = paper(0);
    let t = build_training_symbols(&p, DEFAULT_PN_SEED).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let h: Vec<Jones> = (0..p.n_sc)
        .map(|_| {
            std::array::from_fn(|_| {
                std::array::from_fn(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            })
        })
        .collect();
    let mut g = SubcarrierGrid {
        x: vec![t.placement[0][0].clone(), t.placement[1][0].clone()],
        y: vec![t.placement[0][1].clone(), t.placement[1][1].clone()],
    };
    for (j, &b) in p.occupied_bins().iter().enumerate() {
        for s in 0..2 {
            let (u, v) = (g.x[s][b], g.y[s][b]);
            g.x[s][b] = h[j][0][0] * u + h[j][0][1] * v;
            g.y[s][b] = h[j][1][0] * u + h[j][1][1] * v;
        }
    }
    let est = estimate_channel(&g, &t, &p).unwrap();
    est.h
        .iter()
        .zip(&h)
        .flat_map(|(a, b)| a.iter().flatten().zip(b.iter().flatten()).map(|(u, v)| (u - v).norm()))
        .fold(0.0, f64::max)
}

fn resampler_error() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let tones: Vec<(f64, f64)> = (0..40).map(|_| (rng.random_range(-0.416..0.416), rng.random_range(0.0..std::f64::consts::TAU))).collect();
    let x: Vec<Complex64> = (0..6000)
        .map(|n| tones.iter().map(|&(f, ph)| Complex64::from_polar(1.0, std::f64::consts::TAU * f * n as f64 + ph)).sum())
        .collect();
    let full = x.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let w = DualPolWaveform::new(x.clone(), x, 25e9).unwrap();
    let back = resample(&apply_sco(&w, 160.0).unwrap(), 160e-6, 0).unwrap();
    let n = w.len().min(back.len()) - 32;
    (32..n).map(|i| (w.x[i] - back.x[i]).norm()).fold(0.0, f64::max) / full
}

fn osnr_calibration_error() -> f64 {
    use coofdm::channel::{load_noise_with_reference, measured_osnr_db};
    let p = paper(10);
    let (_, _, w) = received(&p, 2, &ChannelConfig::default());
    let ps = w.total_power();
    let mut worst: f64 = 0.0;
    for target in [12.0, 15.0, 18.0, 21.0] {
        let mut acc = 0.0;
        for seed in 0..10 {
            let n = load_noise_with_reference(&w, ps, target, seed).unwrap();
            let pn: f64 = n.x.iter().zip(&w.x).chain(n.y.iter().zip(&w.y)).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>()
                / w.len() as f64;
            acc += measured_osnr_db(ps, pn, w.sample_rate_hz);
        }
        worst = worst.max((acc / 10.0 - target).abs());
    }
    worst
}

#[test]
fn property_suites() {
    let (shift_fail, scale_fail) = metric_properties(1000);
    let inv = slope_invariant_error();
    let id_errors = identity_chain_errors();
    let est = estimator_error();
    let rs = resampler_error();
    let cal = osnr_calibration_error();
    let ok = shift_fail == 0 && scale_fail == 0 && inv <= 1e-12 && id_errors == 0 && est < 1e-6 && rs < 1e-3 && cal < 0.1;
    assert!(line(
        "property_suites",
        ok,
        format!(
            "shift/scale failures {shift_fail}/{scale_fail} of 1000, slope relation {inv:.1e}, identity chain errors \
             {id_errors}, estimator {est:.1e}, resampler {rs:.1e} full scale, OSNR calibration {cal:.3} dB"
        ),
    ));
}

#[test]
fn sweep_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.toml");
    let mut c = ScenarioConfig { name: "det".into(), trials: 6, master_seed: 77, ..Default::default() };
    c.params.payload_symbols = 4;
    c.delay_range = Some((0, 1000));
    c.channel.cfo_hz = 2.5e9;
    c.channel.sco_ppm = 160.0;
    std::fs::write(&cfg, c.to_toml().unwrap()).unwrap();
    let run = |out: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_coofdm"))
            .args(["--config", cfg.to_str().unwrap(), "sweep", "--field", "osnr_db", "--values", "12,16,20"])
            .args(["--out-dir", dir.path().join(out).to_str().unwrap()])
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir.path().join(out))
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
            })
            .collect();
        files.sort();
        files
    };
    let (a, b) = (run("a"), run("b"));
    let same = a == b && !a.is_empty();
    assert!(line("sweep_determinism", same, format!("{} files compared byte for byte", a.len())));
}
