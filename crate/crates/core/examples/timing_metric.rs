//! Timing metric under 2.5 GHz CFO, 160 ppm SCO and 15 dB OSNR.
//!
//! Pass a directory to write `timing_trace.csv`, `integer_cfo.csv` and
//! `sco_phase.csv`.

use std::path::PathBuf;

use coofdm::harness::write_sync_traces;
use coofdm::prelude::*;

fn main() -> coofdm::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from);
    let params = OfdmParams::paper();
    let training = build_training_symbols(&params, DEFAULT_PN_SEED)?;
    let bits = random_bits(7, frame_bits(&params));
    let tx = modulate_frame(&training, &map_dual_payload(&bits, &params)?, &params)?;
    let ch = ChannelConfig {
        delay_samples: 2000,
        cfo_hz: 2.5e9,
        sco_ppm: 160.0,
        osnr_db: Some(15.0),
        noise_seed: 3,
        ..Default::default()
    };
    let mut rx = run_channel(&tx, &ch)?;
    rx.pad_tail(64);
    let cfg = SyncConfig {
        search_range: Some((0, 4000)),
        keep_traces: true,
        ..Default::default()
    };
    let s = synchronize(&rx, &params, &training, &cfg)?;
    let t = s.traces.as_ref().expect("traces kept");
    let mut sorted = t.timing_x.values.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    println!("true start 2000, d_hat_x {}, d_hat_y {}", s.d_hat_x, s.d_hat_y);
    println!("peak {:.3}, largest other value {:.3}", sorted[0], sorted[1]);
    let far = t
        .timing_x
        .values
        .iter()
        .enumerate()
        .filter(|(i, _)| (*i as i64 - 2000).abs() > 5)
        .map(|(_, v)| *v)
        .fold(0.0, f64::max);
    println!("largest value more than 5 samples from the peak {far:.3}");
    if let Some(dir) = out {
        std::fs::create_dir_all(&dir).map_err(|e| Error::Config(e.to_string()))?;
        write_sync_traces(&dir, &s)?;
        println!("traces written to {}", dir.display());
    }
    Ok(())
}
