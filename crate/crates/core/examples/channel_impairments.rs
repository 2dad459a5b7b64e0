//! Walks a frame through each impairment stage and checks the noise level.

use coofdm::channel::{load_noise_with_reference, measured_osnr_db};
use coofdm::prelude::*;

fn main() -> coofdm::Result<()> {
    let mut params = OfdmParams::paper();
    params.payload_symbols = 20;
    let training = build_training_symbols(&params, DEFAULT_PN_SEED)?;
    let bits = random_bits(1, frame_bits(&params));
    let w = modulate_frame(&training, &map_dual_payload(&bits, &params)?, &params)?;
    let p0 = w.total_power();

    let s = apply_sco(&w, 160.0)?;
    println!("SCO 160 ppm: {} -> {} samples (drift per symbol {:.3} samples)", w.len(), s.len(), 558.0 * 160e-6);
    let c = apply_cfo(&s, 2.5e9)?;
    let step = (c.x[1] * s.x[1].conj() * (c.x[0] * s.x[0].conj()).conj()).arg();
    println!("CFO 2.5 GHz: phase step {step:.6} rad/sample, power ratio {:.12}", c.total_power() / s.total_power());
    let d = apply_dgd(&c, 7);
    println!("DGD 7 samples = {:.0} ps at 25 GS/s", 7.0 / params.sample_rate_hz * 1e12);
    let t = apply_timing_offset(&d, 1000);
    println!("delay 1000: first sample {}, length {}", t.x[0], t.len());

    for osnr in [12.0, 15.0, 20.0] {
        let mut acc = 0.0;
        for seed in 0..10 {
            let n = load_noise_with_reference(&w, p0, osnr, seed)?;
            let noise: f64 = n
                .x
                .iter()
                .zip(&w.x)
                .chain(n.y.iter().zip(&w.y))
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                / w.len() as f64;
            acc += measured_osnr_db(p0, noise, params.sample_rate_hz);
        }
        println!("target OSNR {osnr:4.1} dB -> measured {:.3} dB (10 seeds)", acc / 10.0);
    }

    for bits in [8, 9, 16] {
        let q = quantize(&w, bits)?;
        let err: f64 = q.x.iter().zip(&w.x).map(|(a, b)| (a - b).norm_sqr()).sum();
        let sig: f64 = w.x.iter().map(|v| v.norm_sqr()).sum();
        println!("{bits:2}-bit quantizer: SQNR {:.1} dB", 10.0 * (sig / err).log10());
    }
    Ok(())
}
