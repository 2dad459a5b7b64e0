//! OSNR sweep under the stress impairments, written as a CSV tree.
//!
//! Usage: `monte_carlo_sweep [output_dir] [trials]`.

use std::path::PathBuf;

use coofdm::harness::{run_sweep, write_sweep, ScenarioConfig, SweepField};

const SCENARIO: &str = r#"
name = "stress"
trials = 20
master_seed = 2024
delay_range = [0, 5000]

[channel]
cfo_hz = 2.5e9
sco_ppm = 160.0

[sync]
threshold = 0.35
"#;

fn main() -> coofdm::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("coofdm_sweep"));
    let mut cfg = ScenarioConfig::from_toml(SCENARIO)?;
    if let Some(t) = args.next().and_then(|s| s.parse().ok()) {
        cfg.trials = t;
    }
    let values = [12.0, 15.0, 18.0, 21.0];
    let out = run_sweep(&cfg, SweepField::OsnrDb, &values)?;
    write_sweep(&cfg, &out, &dir)?;
    println!("{:>6} {:>7} {:>11} {:>11} {:>10}", "OSNR", "FER", "CFO MSE", "max |err|", "BER");
    for r in &out.rows {
        println!(
            "{:>6.1} {:>7.4} {:>11.3e} {:>8.2} MHz {:>10.3e}",
            r.value,
            r.frame_error_rate,
            r.cfo_mse,
            r.cfo_max_abs_err_hz / 1e6,
            r.ber
        );
    }
    println!("written to {}", dir.display());
    Ok(())
}
