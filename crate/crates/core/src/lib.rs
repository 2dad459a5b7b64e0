//! Dual-polarization coherent optical OFDM simulation with joint frame,
//! carrier-frequency and sampling-clock synchronization.
//!
//! The transmit side builds Golay/Alamouti training symbols and a 16-QAM
//! payload ([`training`], [`frame`]). [`channel`] applies delay, differential
//! group delay, carrier and clock offsets, ASE noise and converter
//! quantization. [`sync`] recovers the frame start, the carrier offset and the
//! clock offset from the two training symbols, [`receiver`] equalizes and
//! demaps, and [`metrics`] scores the result. [`harness`] runs reproducible
//! Monte-Carlo trials and sweeps and writes plot-ready CSV files.
//!
//! The `examples/` directory holds one runnable program per capability:
//!
//! | example | shows |
//! |---|---|
//! | `golay_training` | complementary pairs and the training grid |
//! | `frame_export` | building a frame and writing ASCII waveform files |
//! | `channel_impairments` | each impairment stage and the noise calibration |
//! | `timing_metric` | the timing metric under the stress scenario |
//! | `cfo_estimation` | fractional and integer carrier-offset recovery |
//! | `sco_compensation` | phase-slope fit, feedback loop, constellations |
//! | `dgd_penalty` | required-OSNR penalty versus differential group delay |
//! | `monte_carlo_sweep` | a configured sweep written to a CSV tree |
//!
//! ```
//! use coofdm::prelude::*;
//!
//! let mut params = OfdmParams::paper();
//! params.payload_symbols = 2;
//! let training = build_training_symbols(&params, DEFAULT_PN_SEED).unwrap();
//! let bits = random_bits(1, frame_bits(&params));
//! let payload = map_dual_payload(&bits, &params).unwrap();
//! let tx = modulate_frame(&training, &payload, &params).unwrap();
//!
//! let ch = ChannelConfig { delay_samples: 300, cfo_hz: 2.5e9, ..Default::default() };
//! let mut rx = run_channel(&tx, &ch).unwrap();
//! rx.pad_tail(64);
//!
//! let sync = synchronize(&rx, &params, &training, &SyncConfig::default()).unwrap();
//! assert_eq!(sync.d_hat_x, 300);
//! assert_eq!(sync.cfo.integer, 51);
//! ```

pub mod channel;
pub mod dsp;
pub mod error;
pub mod frame;
pub mod golay;
pub mod harness;
pub mod metrics;
pub mod params;
pub mod pn;
pub mod qam;
pub mod receiver;
pub mod resample;
pub mod sync;
pub mod training;
pub mod waveform;

pub use error::{Error, Result};

/// Commonly used items.
pub mod prelude {
    pub use crate::channel::{
        apply_cfo, apply_dgd, apply_sco, apply_timing_offset, load_noise, quantize, run_channel,
        ChannelConfig,
    };
    pub use crate::frame::{
        frame_bits, map_dual_payload, map_payload, modulate_frame, random_bits, DualPolWaveform,
    };
    pub use crate::golay::golay_pair;
    pub use crate::harness::{run_sweep, run_trial, ScenarioConfig, SweepField};
    pub use crate::metrics::{ber, cfo_mse, evm, frame_error, osnr_penalty, r_osnr, BerCurve};
    pub use crate::params::OfdmParams;
    pub use crate::pn::DEFAULT_PN_SEED;
    pub use crate::receiver::{receive, ReceiverConfig};
    pub use crate::sync::{apply_corrections, synchronize, AlphaPolicy, SyncConfig, SyncResult};
    pub use crate::training::{build_training_symbols, TrainingSet};
    pub use crate::waveform::{export_waveform, import_waveform};
    pub use crate::{Error, Result};
}
