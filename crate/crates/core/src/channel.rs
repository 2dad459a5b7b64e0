//! Baseband channel impairments.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dsp::rotate;
use crate::error::{Error, Result};
use crate::frame::DualPolWaveform;
use crate::resample::stretch;

/// Noise reference bandwidth (0.1 nm at 1550 nm).
pub const OSNR_REF_BW_HZ: f64 = 12.5e9;

/// Impairment vector applied by [`run_channel`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    pub delay_samples: usize,
    pub dgd_samples: usize,
    pub cfo_hz: f64,
    pub sco_ppm: f64,
    /// `None` disables noise loading.
    pub osnr_db: Option<f64>,
    pub dac_bits: Option<u32>,
    pub adc_bits: Option<u32>,
    pub noise_seed: u64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            delay_samples: 0,
            dgd_samples: 0,
            cfo_hz: 0.0,
            sco_ppm: 0.0,
            osnr_db: None,
            dac_bits: None,
            adc_bits: None,
            noise_seed: 1,
        }
    }
}

/// Prepends `delay` zero samples to both polarizations.
pub fn apply_timing_offset(w: &DualPolWaveform, delay: usize) -> DualPolWaveform {
    let mut out = w.clone();
    if delay > 0 {
        for s in out.pols_mut() {
            s.splice(0..0, std::iter::repeat_n(Complex64::new(0.0, 0.0), delay));
        }
    }
    out
}

/// Delays y by `alpha` whole samples; x is zero-padded at the tail to match.
pub fn apply_dgd(w: &DualPolWaveform, alpha: usize) -> DualPolWaveform {
    let mut out = w.clone();
    if alpha > 0 {
        let zeros = std::iter::repeat_n(Complex64::new(0.0, 0.0), alpha);
        out.y.splice(0..0, zeros.clone());
        out.x.extend(zeros);
    }
    out
}

fn check_cfo(f_hz: f64, fs: f64) -> Result<()> {
    if !f_hz.is_finite() || f_hz.abs() >= fs / 2.0 {
        return Err(Error::Param(format!(
            "frequency offset {f_hz} Hz outside ±fs/2"
        )));
    }
    Ok(())
}

/// Rotates both polarizations by `exp(+j·2π·f·n/fs)`.
pub fn apply_cfo(w: &DualPolWaveform, cfo_hz: f64) -> Result<DualPolWaveform> {
    check_cfo(cfo_hz, w.sample_rate_hz)?;
    let mut out = w.clone();
    let f = cfo_hz / w.sample_rate_hz;
    for s in out.pols_mut() {
        rotate(s, f, 0);
    }
    Ok(out)
}

/// Undoes [`apply_cfo`].
pub fn compensate_cfo(w: &DualPolWaveform, f_hz: f64) -> Result<DualPolWaveform> {
    apply_cfo(w, -f_hz).map_err(|_| {
        Error::Param(format!("frequency offset {f_hz} Hz outside ±fs/2"))
    })
}

/// Resamples both polarizations as seen by a receiver clock offset by `sco_ppm`.
pub fn apply_sco(w: &DualPolWaveform, sco_ppm: f64) -> Result<DualPolWaveform> {
    if !sco_ppm.is_finite() || sco_ppm.abs() >= 1000.0 {
        return Err(Error::Param(format!("SCO {sco_ppm} ppm outside ±1000")));
    }
    let g = sco_ppm * 1e-6;
    DualPolWaveform::new(stretch(&w.x, g)?, stretch(&w.y, g)?, w.sample_rate_hz)
}

/// Total noise power for a given signal power and OSNR.
pub fn noise_power_for_osnr(p_sig_total: f64, osnr_db: f64, sample_rate_hz: f64) -> f64 {
    p_sig_total / 10f64.powf(osnr_db / 10.0) * (sample_rate_hz / OSNR_REF_BW_HZ)
}

/// OSNR in dB implied by measured signal and noise powers.
pub fn measured_osnr_db(p_sig_total: f64, p_noise_total: f64, sample_rate_hz: f64) -> f64 {
    10.0 * (p_sig_total / p_noise_total * sample_rate_hz / OSNR_REF_BW_HZ).log10()
}

/// Adds white Gaussian noise for `osnr_db`, with signal power measured on `w`.
pub fn load_noise(w: &DualPolWaveform, osnr_db: f64, noise_seed: u64) -> Result<DualPolWaveform> {
    load_noise_with_reference(w, w.total_power(), osnr_db, noise_seed)
}

/// As [`load_noise`] but with the signal power supplied by the caller.
pub fn load_noise_with_reference(
    w: &DualPolWaveform,
    p_sig_total: f64,
    osnr_db: f64,
    noise_seed: u64,
) -> Result<DualPolWaveform> {
    if !osnr_db.is_finite() {
        return Err(Error::Param("OSNR must be finite".into()));
    }
    if p_sig_total.is_nan() || p_sig_total <= 0.0 {
        return Err(Error::Param("zero signal power, OSNR undefined".into()));
    }
    let p_n = noise_power_for_osnr(p_sig_total, osnr_db, w.sample_rate_hz);
    // half per polarization, half again per quadrature
    let sigma = (p_n / 4.0).sqrt();
    let mut out = w.clone();
    for (stream, s) in out.pols_mut().into_iter().zip(0u64..) {
        let mut rng = ChaCha8Rng::seed_from_u64(noise_seed);
        rng.set_stream(s);
        for v in stream.iter_mut() {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            *v += Complex64::new(re, im) * sigma;
        }
    }
    Ok(out)
}

fn quantize_component(vals: &mut [f64], bits: u32) {
    let rms = (vals.iter().map(|v| v * v).sum::<f64>() / vals.len().max(1) as f64).sqrt();
    if rms == 0.0 {
        return;
    }
    let levels = (1u64 << bits) as f64;
    let step = 8.0 * rms / levels;
    let top = (levels / 2.0 - 0.5) * step;
    for v in vals.iter_mut() {
        let q = ((*v / step).floor() + 0.5) * step;
        *v = q.clamp(-top, top);
    }
}

/// Mid-rise uniform quantizer, I and Q independently, clipped at ±4σ.
pub fn quantize(w: &DualPolWaveform, bits: u32) -> Result<DualPolWaveform> {
    if !(2..=16).contains(&bits) {
        return Err(Error::Param(format!("quantizer bits {bits} outside 2..=16")));
    }
    let mut out = w.clone();
    for stream in out.pols_mut() {
        let mut re: Vec<f64> = stream.iter().map(|v| v.re).collect();
        let mut im: Vec<f64> = stream.iter().map(|v| v.im).collect();
        quantize_component(&mut re, bits);
        quantize_component(&mut im, bits);
        for ((v, r), i) in stream.iter_mut().zip(re).zip(im) {
            *v = Complex64::new(r, i);
        }
    }
    Ok(out)
}

/// DAC quantize, SCO, CFO, DGD, timing offset, noise, ADC quantize.
///
/// The noise reference power is taken before the timing offset so that
/// leading zeros do not dilute it.
pub fn run_channel(w: &DualPolWaveform, cfg: &ChannelConfig) -> Result<DualPolWaveform> {
    let mut s = match cfg.dac_bits {
        Some(b) => quantize(w, b)?,
        None => w.clone(),
    };
    if cfg.sco_ppm != 0.0 {
        s = apply_sco(&s, cfg.sco_ppm)?;
    }
    if cfg.cfo_hz != 0.0 {
        s = apply_cfo(&s, cfg.cfo_hz)?;
    }
    s = apply_dgd(&s, cfg.dgd_samples);
    let p_sig = s.total_power();
    s = apply_timing_offset(&s, cfg.delay_samples);
    if let Some(osnr) = cfg.osnr_db {
        s = load_noise_with_reference(&s, p_sig, osnr, cfg.noise_seed)?;
    }
    if let Some(b) = cfg.adc_bits {
        s = quantize(&s, b)?;
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(n: usize) -> DualPolWaveform {
        let x: Vec<Complex64> = (0..n)
            .map(|i| Complex64::from_polar(1.0, 0.37 * i as f64))
            .collect();
        DualPolWaveform::new(x.clone(), x, 25e9).unwrap()
    }

    #[test]
    fn identities() {
        let w = tone(100);
        assert_eq!(apply_timing_offset(&w, 0), w);
        assert_eq!(apply_dgd(&w, 0), w);
        assert_eq!(apply_cfo(&w, 0.0).unwrap(), w);
        assert_eq!(apply_sco(&w, 0.0).unwrap(), w);
        assert_eq!(run_channel(&w, &ChannelConfig::default()).unwrap(), w);
    }

    #[test]
    fn delay_prepends_zeros() {
        let w = apply_timing_offset(&tone(10), 100);
        assert_eq!(w.len(), 110);
        assert!(w.x[..100].iter().chain(&w.y[..100]).all(|v| v.norm() == 0.0));
    }

    #[test]
    fn dgd_lengths_equal() {
        let w = apply_dgd(&tone(10), 7);
        assert_eq!(w.x.len(), 17);
        assert_eq!(w.y.len(), 17);
        assert_eq!(w.y[7], tone(10).y[0]);
    }

    #[test]
    fn cfo_step_and_power() {
        let one = DualPolWaveform::new(vec![Complex64::new(1.0, 0.0); 4], vec![Complex64::new(1.0, 0.0); 4], 25e9).unwrap();
        let r = apply_cfo(&one, 2.5e9).unwrap();
        let step = (r.x[1] * r.x[0].conj()).arg();
        assert!((step - 2.0 * std::f64::consts::PI * 0.1).abs() < 1e-12);
        assert!(apply_cfo(&one, 13e9).is_err());
    }

    #[test]
    fn zero_power_noise_rejected() {
        let z = DualPolWaveform::new(vec![Complex64::new(0.0, 0.0); 4], vec![Complex64::new(0.0, 0.0); 4], 25e9).unwrap();
        assert!(load_noise(&z, 10.0, 1).is_err());
        assert_eq!(quantize(&z, 8).unwrap(), z);
        assert!(quantize(&z, 1).is_err());
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let w = tone(500);
        let cfg = ChannelConfig {
            cfo_hz: 1e9,
            sco_ppm: 100.0,
            osnr_db: Some(15.0),
            delay_samples: 12,
            dgd_samples: 3,
            adc_bits: Some(8),
            dac_bits: Some(9),
            noise_seed: 42,
        };
        assert_eq!(run_channel(&w, &cfg).unwrap(), run_channel(&w, &cfg).unwrap());
    }
}
