//! Scenario configuration, trial execution and sweeps.

mod plot;
mod sweep;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use plot::{emit_trial_plots, write_constellation, write_report, write_rows, write_sync_traces};
pub use sweep::{
    read_ber_curve, run_penalty_table, run_point, run_sweep, write_sweep, CurvePoints, PenaltyRow,
    SweepOutput, SweepRow,
};

use crate::channel::{run_channel, ChannelConfig};
use crate::error::{Error, Result};
use crate::frame::{frame_bits, map_dual_payload, modulate_frame, random_bits, DualPolWaveform, SymbolGrid};
use crate::metrics::{bit_errors, evm_masked, frame_error};
use crate::params::OfdmParams;
use crate::pn::DEFAULT_PN_SEED;
use crate::receiver::{receive, Reception, ReceiverConfig, SubcarrierGrid};
use crate::sync::{apply_corrections, synchronize, AlphaPolicy, SyncConfig, SyncResult};
use crate::training::{build_training_with, PnWeighting, TrainingSet};

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "COOFDM_OUTPUT_DIR";

/// Default post-correction BER threshold for required-OSNR figures.
pub const DEFAULT_TARGET_BER: f64 = 1.8e-2;

/// A channel parameter that a sweep varies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepField {
    OsnrDb,
    DgdSamples,
    ScoPpm,
    CfoHz,
}

impl SweepField {
    pub fn name(self) -> &'static str {
        match self {
            SweepField::OsnrDb => "osnr_db",
            SweepField::DgdSamples => "dgd_samples",
            SweepField::ScoPpm => "sco_ppm",
            SweepField::CfoHz => "cfo_hz",
        }
    }

    pub fn apply(self, ch: &mut ChannelConfig, v: f64) -> Result<()> {
        match self {
            SweepField::OsnrDb => ch.osnr_db = Some(v),
            SweepField::DgdSamples => {
                if v < 0.0 || v.fract() != 0.0 {
                    return Err(Error::Config(format!("dgd_samples must be a whole number, got {v}")));
                }
                ch.dgd_samples = v as usize;
            }
            SweepField::ScoPpm => ch.sco_ppm = v,
            SweepField::CfoHz => ch.cfo_hz = v,
        }
        Ok(())
    }
}

impl std::str::FromStr for SweepField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "osnr_db" => Ok(SweepField::OsnrDb),
            "dgd_samples" => Ok(SweepField::DgdSamples),
            "sco_ppm" => Ok(SweepField::ScoPpm),
            "cfo_hz" => Ok(SweepField::CfoHz),
            _ => Err(Error::Config(format!("unknown sweep field {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub field: SweepField,
    pub values: Vec<f64>,
    #[serde(default = "default_target")]
    pub target_ber: f64,
    /// When set, every swept value gets a BER curve over these OSNRs and a
    /// penalty relative to the first value.
    #[serde(default)]
    pub osnr_grid_db: Option<Vec<f64>>,
    /// Baseline `ber_curve.csv` for OSNR sweeps.
    #[serde(default)]
    pub baseline_curve: Option<PathBuf>,
    /// Write a constellation dump of trial 0 for each value.
    #[serde(default)]
    pub constellations: bool,
}

fn default_target() -> f64 {
    DEFAULT_TARGET_BER
}

/// Everything needed to run reproducible trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub params: OfdmParams,
    pub channel: ChannelConfig,
    pub sync: SyncConfig,
    pub receiver: ReceiverConfig,
    pub trials: usize,
    pub master_seed: u64,
    pub pn_seed: u16,
    pub pn_weighting: PnWeighting,
    /// Inclusive range of a per-trial uniform random delay, replacing
    /// `channel.delay_samples`.
    pub delay_range: Option<(usize, usize)>,
    /// Zero samples appended after the frame before the channel.
    pub tail_samples: usize,
    /// Use the channel's DGD as the synchronizer's delay hint.
    pub alpha_from_channel: bool,
    /// Keep adding trials to a sweep point until this many bit errors.
    pub min_bit_errors: Option<u64>,
    pub max_trials: usize,
    pub output_dir: Option<PathBuf>,
    pub sweep: Option<SweepSpec>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            name: "scenario".into(),
            params: OfdmParams::paper(),
            channel: ChannelConfig::default(),
            sync: SyncConfig::default(),
            receiver: ReceiverConfig::default(),
            trials: 1,
            master_seed: 1,
            pn_seed: DEFAULT_PN_SEED,
            pn_weighting: PnWeighting::None,
            delay_range: None,
            tail_samples: 64,
            alpha_from_channel: true,
            min_bit_errors: None,
            max_trials: 1000,
            output_dir: None,
            sweep: None,
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.params
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if let Some((lo, hi)) = self.delay_range {
            if lo > hi {
                return Err(Error::Config("delay_range lower bound above upper".into()));
            }
        }
        if self.pn_seed == 0 {
            return Err(Error::Config("pn_seed must be nonzero".into()));
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return Err(Error::Config("sweep needs at least one value".into()));
            }
        }
        Ok(())
    }

    /// Output directory: explicit setting, then the environment, then `out`.
    pub fn resolve_output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn training(&self) -> Result<TrainingSet> {
        build_training_with(&self.params, self.pn_seed, self.pn_weighting)
    }

    /// Synchronizer settings for one trial with ground-truth delay `d0`.
    fn sync_for_trial(&self, d0_max: usize) -> SyncConfig {
        let mut s = self.sync.clone();
        if self.alpha_from_channel {
            if let AlphaPolicy::Fixed(_) = s.alpha {
                s.alpha = AlphaPolicy::Fixed(self.channel.dgd_samples);
            }
        }
        if s.search_range.is_none() {
            s.search_range = Some((0, d0_max + 2 * self.params.symbol_len()));
        }
        s
    }
}

/// SplitMix64 finalizer over `(master, index, stream)`.
pub fn derive_seed(master: u64, index: u64, stream: u64) -> u64 {
    let mut z = master
        ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ stream.wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const STREAM_BITS: u64 = 1;
const STREAM_NOISE: u64 = 2;
const STREAM_DELAY: u64 = 3;

/// Ground truth and outcome of one trial.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialReport {
    pub scenario: String,
    pub trial: usize,
    pub d0: usize,
    pub cfo_hz: f64,
    pub sco_ppm: f64,
    pub dgd_samples: usize,
    pub osnr_db: Option<f64>,
    pub status: String,
    pub d_hat_x: Option<usize>,
    pub d_hat_y: Option<usize>,
    pub alpha_used: Option<usize>,
    pub peak_value: Option<f64>,
    pub cfo_est_hz: Option<f64>,
    pub cfo_integer: Option<i64>,
    pub cfo_fractional: Option<f64>,
    pub sco_est_ppm: Option<f64>,
    pub sco_iterations: Option<usize>,
    pub frame_error: bool,
    pub ber: f64,
    pub bit_errors: u64,
    pub bits: u64,
    pub evm_percent: Option<f64>,
    pub excluded_subcarriers: usize,
}

/// Intermediate products of one trial, for plotting.
#[derive(Clone, Debug)]
pub struct TrialOutcome {
    pub report: TrialReport,
    pub sync: Option<SyncResult>,
    pub reception: Option<Reception>,
    pub tx_payload: SubcarrierGrid,
}

/// Transmitted frame for a trial: training, payload bits and waveform.
pub fn transmit(
    cfg: &ScenarioConfig,
    training: &TrainingSet,
    trial: usize,
) -> Result<(Vec<u8>, [SymbolGrid; 2], DualPolWaveform)> {
    let bits = random_bits(
        derive_seed(cfg.master_seed, trial as u64, STREAM_BITS),
        frame_bits(&cfg.params),
    );
    let payload = map_dual_payload(&bits, &cfg.params)?;
    let mut w = modulate_frame(training, &payload, &cfg.params)?;
    w.pad_tail(cfg.tail_samples);
    Ok((bits, payload, w))
}

/// Channel settings for a trial, with derived delay and noise seed.
pub fn trial_channel(cfg: &ScenarioConfig, trial: usize) -> ChannelConfig {
    let mut ch = cfg.channel.clone();
    ch.noise_seed = derive_seed(cfg.master_seed, trial as u64, STREAM_NOISE);
    if let Some((lo, hi)) = cfg.delay_range {
        let span = (hi - lo + 1) as u64;
        ch.delay_samples = lo + (derive_seed(cfg.master_seed, trial as u64, STREAM_DELAY) % span) as usize;
    }
    ch
}

pub fn run_trial(cfg: &ScenarioConfig, trial: usize) -> TrialReport {
    match cfg.training() {
        Ok(t) => run_trial_with(cfg, &t, trial, false).report,
        Err(e) => failed_report(cfg, &trial_channel(cfg, trial), trial, format!("error: {e}")),
    }
}

/// Like [`run_trial`] but keeps traces, the reception and the payload.
pub fn run_trial_detailed(cfg: &ScenarioConfig, trial: usize) -> Result<TrialOutcome> {
    let t = cfg.training()?;
    Ok(run_trial_with(cfg, &t, trial, true))
}

fn failed_report(cfg: &ScenarioConfig, ch: &ChannelConfig, trial: usize, status: String) -> TrialReport {
    let bits = frame_bits(&cfg.params) as u64;
    TrialReport {
        scenario: cfg.name.clone(),
        trial,
        d0: ch.delay_samples,
        cfo_hz: ch.cfo_hz,
        sco_ppm: ch.sco_ppm,
        dgd_samples: ch.dgd_samples,
        osnr_db: ch.osnr_db,
        status,
        d_hat_x: None,
        d_hat_y: None,
        alpha_used: None,
        peak_value: None,
        cfo_est_hz: None,
        cfo_integer: None,
        cfo_fractional: None,
        sco_est_ppm: None,
        sco_iterations: None,
        frame_error: true,
        // an undetected frame delivers no information: count half the bits wrong
        ber: 0.5,
        bit_errors: bits / 2,
        bits,
        evm_percent: None,
        excluded_subcarriers: 0,
    }
}

pub(crate) fn run_trial_with(
    cfg: &ScenarioConfig,
    training: &TrainingSet,
    trial: usize,
    detailed: bool,
) -> TrialOutcome {
    let ch = trial_channel(cfg, trial);
    let empty = SubcarrierGrid { x: vec![], y: vec![] };
    let fail = |status: String, tx_payload: SubcarrierGrid| TrialOutcome {
        report: failed_report(cfg, &ch, trial, status),
        sync: None,
        reception: None,
        tx_payload,
    };
    let (bits, payload, w) = match transmit(cfg, training, trial) {
        Ok(v) => v,
        Err(e) => return fail(format!("error: {e}"), empty),
    };
    let [px, py] = payload;
    let tx_payload = SubcarrierGrid { x: px, y: py };
    let r = match run_channel(&w, &ch) {
        Ok(r) => r,
        Err(e) => return fail(format!("error: {e}"), tx_payload),
    };
    let mut sync_cfg = cfg.sync_for_trial(cfg.delay_range.map_or(ch.delay_samples, |d| d.1));
    sync_cfg.keep_traces |= detailed;
    let sync = match synchronize(&r, &cfg.params, training, &sync_cfg) {
        Ok(s) => s,
        Err(Error::NoFrame { .. }) => return fail("no_frame".into(), tx_payload),
        Err(e) => return fail(format!("error: {e}"), tx_payload),
    };
    let mut report = failed_report(cfg, &ch, trial, "ok".into());
    report.d_hat_x = Some(sync.d_hat_x);
    report.d_hat_y = Some(sync.d_hat_y);
    report.alpha_used = Some(sync.alpha_used);
    report.peak_value = Some(sync.peak_value);
    report.cfo_est_hz = Some(sync.cfo.total_hz);
    report.cfo_integer = Some(sync.cfo.integer);
    report.cfo_fractional = Some(sync.cfo.fractional);
    report.sco_est_ppm = sync.sco.as_ref().map(|s| s.gamma * 1e6);
    report.sco_iterations = sync.sco.as_ref().map(|s| s.iterations);
    report.frame_error = frame_error(sync.d_hat_x, ch.delay_samples, ch.dgd_samples, &cfg.params);

    let received = apply_corrections(&r, &sync)
        .and_then(|c| receive(&c, sync.d_hat_x, training, &cfg.params, &cfg.receiver));
    let reception = match received {
        Ok(rx) => rx,
        Err(e) => {
            report.status = format!("error: {e}");
            return TrialOutcome {
                report,
                sync: Some(sync),
                reception: None,
                tx_payload,
            };
        }
    };
    let mask = reception.bit_mask();
    match bit_errors(&bits, &reception.bits, Some(&mask)) {
        Ok((e, n)) => {
            report.bit_errors = e;
            report.bits = n;
            report.ber = e as f64 / n as f64;
        }
        Err(e) => report.status = format!("error: {e}"),
    }
    report.evm_percent =
        evm_masked(&reception.payload, &tx_payload, &cfg.params, Some(&reception.usable)).ok();
    report.excluded_subcarriers = reception.usable.iter().filter(|u| !**u).count();
    TrialOutcome {
        report,
        sync: detailed.then_some(sync),
        reception: detailed.then_some(reception),
        tx_payload,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_are_distinct_and_stable() {
        let a = derive_seed(7, 0, 1);
        assert_eq!(a, derive_seed(7, 0, 1));
        assert_ne!(a, derive_seed(7, 1, 1));
        assert_ne!(a, derive_seed(7, 0, 2));
        assert_ne!(a, derive_seed(8, 0, 1));
    }

    #[test]
    fn field_names_round_trip() {
        for f in [SweepField::OsnrDb, SweepField::DgdSamples, SweepField::ScoPpm, SweepField::CfoHz] {
            assert_eq!(f.name().parse::<SweepField>().unwrap(), f);
        }
        assert!("bogus".parse::<SweepField>().is_err());
    }
}
