//! Payload mapping and frame modulation.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dsp::{add_cp, Dft};
use crate::error::{Error, Result};
use crate::params::OfdmParams;
use crate::qam;
use crate::training::{place, TrainingSet};

/// Two aligned complex sample streams.
#[derive(Clone, Debug, PartialEq)]
pub struct DualPolWaveform {
    pub x: Vec<Complex64>,
    pub y: Vec<Complex64>,
    pub sample_rate_hz: f64,
}

impl DualPolWaveform {
    pub fn new(x: Vec<Complex64>, y: Vec<Complex64>, sample_rate_hz: f64) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Length {
                expected: x.len(),
                actual: y.len(),
            });
        }
        if sample_rate_hz.is_nan() || sample_rate_hz <= 0.0 {
            return Err(Error::Param("sample rate must be positive".into()));
        }
        Ok(Self {
            x,
            y,
            sample_rate_hz,
        })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn pol(&self, p: usize) -> &[Complex64] {
        if p == 0 {
            &self.x
        } else {
            &self.y
        }
    }

    pub fn pols_mut(&mut self) -> [&mut Vec<Complex64>; 2] {
        [&mut self.x, &mut self.y]
    }

    /// Appends `n` zero samples to both polarizations.
    pub fn pad_tail(&mut self, n: usize) {
        for s in self.pols_mut() {
            s.extend(std::iter::repeat_n(Complex64::new(0.0, 0.0), n));
        }
    }

    /// Mean power summed over both polarizations.
    pub fn total_power(&self) -> f64 {
        crate::dsp::mean_power(&self.x) + crate::dsp::mean_power(&self.y)
    }
}

/// Frequency-domain symbols of one polarization, each row `n_fft` bins long.
pub type SymbolGrid = Vec<Vec<Complex64>>;

/// Maps `4 · n_sc · payload_symbols` bits to one polarization's payload grid.
pub fn map_payload(bits: &[u8], params: &OfdmParams) -> Result<SymbolGrid> {
    let expected = 4 * params.n_sc * params.payload_symbols;
    if bits.len() != expected {
        return Err(Error::Length {
            expected,
            actual: bits.len(),
        });
    }
    let per_symbol = 4 * params.n_sc;
    Ok(bits
        .chunks(per_symbol.max(1))
        .take(params.payload_symbols)
        .map(|sym| {
            let pts: Vec<Complex64> = sym.chunks(4).map(qam::map4).collect();
            place(params, &pts)
        })
        .collect())
}

/// Splits one bit stream evenly (x first) and maps each half.
pub fn map_dual_payload(bits: &[u8], params: &OfdmParams) -> Result<[SymbolGrid; 2]> {
    let half = 4 * params.n_sc * params.payload_symbols;
    if bits.len() != 2 * half {
        return Err(Error::Length {
            expected: 2 * half,
            actual: bits.len(),
        });
    }
    Ok([
        map_payload(&bits[..half], params)?,
        map_payload(&bits[half..], params)?,
    ])
}

/// Inverse of [`map_payload`] on occupied bins, with hard decisions.
pub fn demap_grid(grid: &[Vec<Complex64>], params: &OfdmParams) -> Vec<u8> {
    let bins = params.occupied_bins();
    let mut out = Vec::with_capacity(grid.len() * bins.len() * 4);
    for row in grid {
        for &b in &bins {
            qam::demap4(row[b], &mut out);
        }
    }
    out
}

/// Uniform random bits from a seed.
pub fn random_bits(seed: u64, n: usize) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random::<bool>() as u8).collect()
}

/// Number of payload bits carried by one frame (both polarizations).
pub fn frame_bits(params: &OfdmParams) -> usize {
    8 * params.n_sc * params.payload_symbols
}

/// Training then payload, each symbol inverse-transformed and CP-prefixed.
pub fn modulate_frame(
    training: &TrainingSet,
    payload: &[SymbolGrid; 2],
    params: &OfdmParams,
) -> Result<DualPolWaveform> {
    params.validate()?;
    if payload[0].len() != payload[1].len() {
        return Err(Error::Length {
            expected: payload[0].len(),
            actual: payload[1].len(),
        });
    }
    if training.time_domain[0][0].len() != params.symbol_len() {
        return Err(Error::Length {
            expected: params.symbol_len(),
            actual: training.time_domain[0][0].len(),
        });
    }
    let dft = Dft::new(params.n_fft);
    let n_sym = 2 + payload[0].len();
    let mut streams: [Vec<Complex64>; 2] = Default::default();
    for (p, stream) in streams.iter_mut().enumerate() {
        stream.reserve(n_sym * params.symbol_len());
        stream.extend_from_slice(&training.time_domain[0][p]);
        stream.extend_from_slice(&training.time_domain[1][p]);
        for row in &payload[p] {
            if row.len() != params.n_fft {
                return Err(Error::Length {
                    expected: params.n_fft,
                    actual: row.len(),
                });
            }
            stream.extend(add_cp(&dft.inverse(row), params.n_cp));
        }
    }
    let [x, y] = streams;
    DualPolWaveform::new(x, y, params.sample_rate_hz)
}
