//! Joint frame, carrier-frequency and sampling-clock synchronization.

pub mod cfo;
pub mod sco;
pub mod timing;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use cfo::{
    compensate_cfo, estimate_fractional_cfo, estimate_integer_cfo, CfoEstimate, FractionalCfo,
    IntegerCfo,
};
pub use sco::{estimate_sco, gamma_from_slope, slope_from_gamma, ScoEstimate, ScoFit};
pub use timing::{
    cp_consistency, estimate_frame_start, metric_terms, timing_metric, timing_metric_with,
    timing_metric_y, MetricNorm, TimingMetricTrace,
};

use crate::dsp::Dft;
use crate::error::{Error, Result};
use crate::frame::DualPolWaveform;
use crate::params::OfdmParams;
use crate::resample::{interpolate_at, unstretch};
use crate::training::TrainingSet;

/// How the differential group delay used by the timing metric is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaPolicy {
    /// Use the given delay in samples.
    Fixed(usize),
    /// Try every delay in `0..=max` and keep the best-aligned one.
    Search { max: usize },
}

impl Default for AlphaPolicy {
    fn default() -> Self {
        AlphaPolicy::Fixed(0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyncConfig {
    pub threshold: f64,
    pub loop_tol_ppm: f64,
    pub max_iters: usize,
    pub q_max: usize,
    pub alpha: AlphaPolicy,
    pub metric_norm: MetricNorm,
    /// Inclusive candidate range; `None` searches every start that fits.
    pub search_range: Option<(usize, usize)>,
    pub sco_compensation: bool,
    pub keep_traces: bool,
}

impl Default for SyncConfig {
    fn default() -> Self {
        Self {
            threshold: 0.35,
            loop_tol_ppm: 1.0,
            max_iters: 3,
            q_max: 64,
            alpha: AlphaPolicy::default(),
            metric_norm: MetricNorm::default(),
            search_range: None,
            sco_compensation: true,
            keep_traces: false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SyncFlags {
    pub fractional_low_confidence: bool,
    pub integer_at_edge: bool,
    /// `|d̂ₓ + α − d̂ᵧ|` exceeded the prefix length.
    pub polarization_disagreement: bool,
    pub sco_not_converged: bool,
    pub sco_failed: bool,
}

/// Diagnostic arrays kept when `keep_traces` is set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SyncTraces {
    pub timing_x: TimingMetricTrace,
    pub timing_y: TimingMetricTrace,
    pub integer_cfo: IntegerCfo,
    /// First phase-slope fit of the loop.
    pub sco_fit: Option<ScoFit>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SyncResult {
    pub d_hat_x: usize,
    pub d_hat_y: usize,
    pub alpha_used: usize,
    pub peak_value: f64,
    pub cfo: CfoEstimate,
    pub sco: Option<ScoEstimate>,
    pub flags: SyncFlags,
    pub traces: Option<SyncTraces>,
}

fn default_range(r: &DualPolWaveform, params: &OfdmParams, alpha: usize) -> Result<(usize, usize)> {
    let needed = 2 * params.symbol_len() + alpha + 1;
    if r.len() < needed {
        return Err(Error::Range {
            needed,
            available: r.len(),
        });
    }
    Ok((0, r.len() - needed))
}

fn clamp_range(
    range: Option<(usize, usize)>,
    r: &DualPolWaveform,
    params: &OfdmParams,
    alpha: usize,
) -> Result<(usize, usize)> {
    let full = default_range(r, params, alpha)?;
    Ok(match range {
        Some((lo, hi)) => (lo.min(full.1), hi.min(full.1)),
        None => full,
    })
}

fn locate(
    r: &DualPolWaveform,
    params: &OfdmParams,
    pn: &[f64],
    cfg: &SyncConfig,
) -> Result<(TimingMetricTrace, usize)> {
    match cfg.alpha {
        AlphaPolicy::Fixed(a) => {
            let range = clamp_range(cfg.search_range, r, params, a)?;
            Ok((timing_metric_with(r, params, pn, a, range, cfg.metric_norm)?, a))
        }
        AlphaPolicy::Search { max } => {
            let mut cands = Vec::new();
            for a in 0..=max {
                let range = clamp_range(cfg.search_range, r, params, a)?;
                cands.push((timing_metric_with(r, params, pn, a, range, cfg.metric_norm)?, a));
            }
            let best_peak = cands
                .iter()
                .map(|(t, _)| t.peak_value)
                .fold(f64::MIN, f64::max);
            // the metric is flat along (d - δ, α + 2δ); break the tie with
            // per-polarization prefix consistency over the whole frame
            let n_sym = params.payload_symbols + 2;
            let mut best: Option<(f64, usize)> = None;
            for (i, (t, a)) in cands.iter().enumerate() {
                if t.peak_value < 0.8 * best_peak {
                    continue;
                }
                let d = t.peak_index;
                let score = cp_consistency(&r.x, d, n_sym, params)
                    + cp_consistency(&r.y, d + a, n_sym, params);
                if best.is_none_or(|(s, _)| score > s) {
                    best = Some((score, i));
                }
            }
            let i = best.map(|(_, i)| i).unwrap_or(0);
            Ok(cands.swap_remove(i))
        }
    }
}

/// Samples of `s` starting at `epoch + offset` after undoing a clock offset
/// `gamma` whose epoch is `epoch`.
fn resampled_window(s: &[Complex64], epoch: usize, offset: usize, len: usize, gamma: f64) -> Vec<Complex64> {
    if gamma == 0.0 {
        return s[epoch + offset..epoch + offset + len].to_vec();
    }
    let tail = &s[epoch..];
    (offset..offset + len)
        .map(|m| interpolate_at(tail, m as f64 / (1.0 + gamma)))
        .collect()
}

fn sco_loop(
    r: &DualPolWaveform,
    d_hat: usize,
    alpha: usize,
    training: &TrainingSet,
    params: &OfdmParams,
    cfg: &SyncConfig,
) -> Result<(ScoEstimate, Option<ScoFit>, bool)> {
    let dft = Dft::new(params.n_fft);
    let l = params.symbol_len();
    let needed = d_hat + alpha + 2 * l + 64;
    if r.len() < needed {
        return Err(Error::Range {
            needed,
            available: r.len(),
        });
    }
    let tx = [&training.placement[1][0][..], &training.placement[1][1][..]];
    let mut history = Vec::new();
    let mut first_fit = None;
    let mut gamma = 0.0;
    let mut converged = false;
    for _ in 0..cfg.max_iters.max(1) {
        let wx = resampled_window(&r.x, d_hat, l + params.n_cp, params.n_fft, gamma);
        // the clock offset precedes the group delay, so y's epoch trails by α
        let wy = resampled_window(&r.y, d_hat + alpha, l + params.n_cp, params.n_fft, gamma);
        let (fx, fy) = (dft.forward(&wx), dft.forward(&wy));
        let fit = estimate_sco(&[&fx, &fy], &tx, params)?;
        let step = fit.gamma;
        if first_fit.is_none() {
            first_fit = Some(fit);
        }
        history.push(step);
        gamma += step;
        if step.abs() < cfg.loop_tol_ppm * 1e-6 {
            converged = true;
            break;
        }
    }
    Ok((ScoEstimate::from_history(history, params), first_fit, converged))
}

/// Runs the full chain: timing metric, frame start, fractional CFO,
/// integer CFO, and the SCO estimate/resample loop.
pub fn synchronize(
    r: &DualPolWaveform,
    params: &OfdmParams,
    training: &TrainingSet,
    cfg: &SyncConfig,
) -> Result<SyncResult> {
    params.validate()?;
    let pn = training.metric_weights();
    let (trace_x, alpha) = locate(r, params, &pn, cfg)?;
    let d_hat_x = estimate_frame_start(&trace_x, cfg.threshold).ok_or(Error::NoFrame {
        peak: trace_x.peak_value,
        threshold: cfg.threshold,
    })?;

    let (lo, hi) = trace_x.search_range;
    let full_y = default_range(r, params, 0)?;
    let y_range = ((lo + alpha).min(full_y.1), (hi + alpha).min(full_y.1));
    let trace_y = timing_metric_y(r, params, &pn, alpha, y_range, cfg.metric_norm)?;
    let d_hat_y = trace_y.peak_index;

    let mut flags = SyncFlags {
        polarization_disagreement: (d_hat_x + alpha).abs_diff(d_hat_y) > params.n_cp,
        ..Default::default()
    };

    let df = params.subcarrier_spacing_hz();
    let frac = estimate_fractional_cfo(r, d_hat_x, alpha, params, &pn)?;
    flags.fractional_low_confidence = frac.low_confidence;
    let r_frac = compensate_cfo(r, frac.value * df)?;
    let int = estimate_integer_cfo(&r_frac.x, d_hat_x, training, params, cfg.q_max)?;
    flags.integer_at_edge = int.at_edge;
    let cfo = CfoEstimate::new(int.q, frac.value, params);
    let r_cfo = compensate_cfo(r, cfo.total_hz)?;

    let (sco, sco_fit) = if cfg.sco_compensation {
        match sco_loop(&r_cfo, d_hat_x, alpha, training, params, cfg) {
            Ok((est, fit, converged)) => {
                flags.sco_not_converged = !converged;
                (Some(est), fit)
            }
            Err(_) => {
                flags.sco_failed = true;
                (None, None)
            }
        }
    } else {
        (None, None)
    };

    let traces = cfg.keep_traces.then(|| SyncTraces {
        timing_x: trace_x.clone(),
        timing_y: trace_y,
        integer_cfo: int,
        sco_fit,
    });
    Ok(SyncResult {
        d_hat_x,
        d_hat_y,
        alpha_used: alpha,
        peak_value: trace_x.peak_value,
        cfo,
        sco,
        flags,
        traces,
    })
}

/// Resamples both polarizations from `epoch` onward to undo a clock offset.
pub fn resample(r: &DualPolWaveform, gamma: f64, epoch: usize) -> Result<DualPolWaveform> {
    resample_with_epochs(r, gamma, [epoch, epoch])
}

/// As [`resample`] with a separate epoch per polarization.
pub fn resample_with_epochs(r: &DualPolWaveform, gamma: f64, epochs: [usize; 2]) -> Result<DualPolWaveform> {
    let fix = |s: &[Complex64], epoch: usize| -> Result<Vec<Complex64>> {
        let epoch = epoch.min(s.len());
        let mut out = s[..epoch].to_vec();
        out.extend(unstretch(&s[epoch..], gamma)?);
        Ok(out)
    };
    let (x, mut y) = (fix(&r.x, epochs[0])?, fix(&r.y, epochs[1])?);
    // the two epochs can leave the streams a sample apart in length
    y.resize(x.len(), Complex64::new(0.0, 0.0));
    DualPolWaveform::new(x, y, r.sample_rate_hz)
}

/// Applies the CFO and SCO corrections described by `result`.
pub fn apply_corrections(r: &DualPolWaveform, result: &SyncResult) -> Result<DualPolWaveform> {
    let out = compensate_cfo(r, result.cfo.total_hz)?;
    match &result.sco {
        Some(s) if s.gamma != 0.0 => resample_with_epochs(
            &out,
            s.gamma,
            [result.d_hat_x, result.d_hat_x + result.alpha_used],
        ),
        _ => Ok(out),
    }
}
