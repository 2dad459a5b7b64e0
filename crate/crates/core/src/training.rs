//! Golay/Alamouti training symbols.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dsp::{add_cp, Dft};
use crate::error::Result;
use crate::golay::golay_pair;
use crate::params::OfdmParams;
use crate::pn::pn_sequence;

/// Where the binary weighting sequence is applied.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PnWeighting {
    /// Training symbols are sent unweighted; the timing metric uses unit weights.
    #[default]
    None,
    /// The first training symbol (both polarizations, prefix included) is
    /// multiplied by the sequence at the transmitter and the timing metric
    /// uses the same sequence.
    Transmit,
}

/// Training pair, its dual-polarization placement and the time-domain symbols.
#[derive(Clone, Debug)]
pub struct TrainingSet {
    pub seq_a: Vec<i8>,
    pub seq_b: Vec<i8>,
    /// Transmitted spectra, indexed `[symbol][pol]` (pol 0 = x), full `n_fft` bins.
    pub placement: [[Vec<Complex64>; 2]; 2],
    pub pn: Vec<f64>,
    pub weighting: PnWeighting,
    /// CP-prefixed symbols, indexed `[symbol][pol]`.
    pub time_domain: [[Vec<Complex64>; 2]; 2],
}

impl TrainingSet {
    /// Weights the timing metric should apply for this training set.
    pub fn metric_weights(&self) -> Vec<f64> {
        match self.weighting {
            PnWeighting::None => vec![1.0; self.pn.len()],
            PnWeighting::Transmit => self.pn.clone(),
        }
    }

    /// Per-bin sum of the two polarizations' first-symbol spectra.
    pub fn integer_cfo_reference(&self) -> Vec<Complex64> {
        self.placement[0][0]
            .iter()
            .zip(&self.placement[0][1])
            .map(|(a, b)| a + b)
            .collect()
    }
}

/// Places `values` on the occupied bins of an otherwise zero spectrum.
pub fn place(params: &OfdmParams, values: &[Complex64]) -> Vec<Complex64> {
    let mut spec = vec![Complex64::new(0.0, 0.0); params.n_fft];
    for (&bin, &v) in params.occupied_bins().iter().zip(values) {
        spec[bin] = v;
    }
    spec
}

pub fn build_training_symbols(params: &OfdmParams, pn_seed: u16) -> Result<TrainingSet> {
    build_training_with(params, pn_seed, PnWeighting::None)
}

pub fn build_training_with(
    params: &OfdmParams,
    pn_seed: u16,
    weighting: PnWeighting,
) -> Result<TrainingSet> {
    params.validate()?;
    let (seq_a, seq_b) = golay_pair(params.golay_exponent(), params.n_sc)?;
    let pn = pn_sequence(pn_seed, params.n_fft, params.n_cp)?;
    let a: Vec<Complex64> = seq_a.iter().map(|&v| Complex64::new(v as f64, 0.0)).collect();
    let b: Vec<Complex64> = seq_b.iter().map(|&v| Complex64::new(v as f64, 0.0)).collect();
    let neg_conj_b: Vec<Complex64> = b.iter().map(|v| -v.conj()).collect();
    let conj_a: Vec<Complex64> = a.iter().map(|v| v.conj()).collect();

    let mut placement = [
        [place(params, &a), place(params, &b)],
        [place(params, &neg_conj_b), place(params, &conj_a)],
    ];
    let dft = Dft::new(params.n_fft);
    let mut time_domain: [[Vec<Complex64>; 2]; 2] = Default::default();
    for s in 0..2 {
        for p in 0..2 {
            let mut useful = dft.inverse(&placement[s][p]);
            if s == 0 && weighting == PnWeighting::Transmit {
                for (v, w) in useful.iter_mut().zip(&pn[params.n_cp..]) {
                    *v *= *w;
                }
                placement[s][p] = dft.forward(&useful);
            }
            time_domain[s][p] = add_cp(&useful, params.n_cp);
        }
    }
    Ok(TrainingSet {
        seq_a,
        seq_b,
        placement,
        pn,
        weighting,
        time_domain,
    })
}
