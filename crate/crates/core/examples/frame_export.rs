//! Builds a 50-symbol frame, writes it as four ASCII columns and reads it back.
//!
//! Usage: `frame_export [basepath]` (default `frame` in the system temp dir).

use std::path::PathBuf;

use coofdm::prelude::*;
use coofdm::waveform::waveform_paths;

fn main() -> coofdm::Result<()> {
    let base = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("frame"));
    let params = OfdmParams::paper();
    let training = build_training_symbols(&params, DEFAULT_PN_SEED)?;
    let bits = random_bits(2024, frame_bits(&params));
    let payload = map_dual_payload(&bits, &params)?;
    let w = modulate_frame(&training, &payload, &params)?;
    println!("{} symbols, {} samples per polarization", 2 + params.payload_symbols, w.len());
    println!("mean power per polarization {:.4} (occupied fraction {:.4})", w.total_power() / 2.0, params.n_sc as f64 / params.n_fft as f64);

    export_waveform(&w, &base)?;
    for p in waveform_paths(&base) {
        println!("wrote {}", p.display());
    }
    let back = import_waveform(&base, params.sample_rate_hz)?;
    let err = w
        .x
        .iter()
        .chain(&w.y)
        .zip(back.x.iter().chain(&back.y))
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    println!("round-trip max error {err:.2e}");
    Ok(())
}
