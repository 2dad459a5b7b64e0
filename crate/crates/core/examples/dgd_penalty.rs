//! Required OSNR at BER 1.8e-2 versus differential group delay.
//!
//! Usage: `dgd_penalty [max_dgd] [frames_per_point]`.

use coofdm::harness::{run_penalty_table, ScenarioConfig, SweepField, DEFAULT_TARGET_BER};

fn main() -> coofdm::Result<()> {
    let mut args = std::env::args().skip(1);
    let max_dgd: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(7);
    let frames: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(2);
    let mut cfg = ScenarioConfig {
        name: "dgd".into(),
        trials: frames,
        master_seed: 99,
        ..Default::default()
    };
    cfg.channel.cfo_hz = 2.5e9;
    cfg.channel.sco_ppm = 160.0;
    cfg.channel.delay_samples = 500;
    cfg.min_bit_errors = Some(100);
    let dgd: Vec<f64> = (0..=max_dgd).step_by(max_dgd.max(1)).map(|v| v as f64).collect();
    let osnr: Vec<f64> = (13..=19).map(f64::from).collect();
    let (rows, curves) = run_penalty_table(&cfg, SweepField::DgdSamples, &dgd, &osnr, DEFAULT_TARGET_BER)?;
    for (row, (curve, pts)) in rows.iter().zip(&curves) {
        println!("DGD {} samples ({:.0} ps)", row.value, row.value / 25e9 * 1e12);
        for (p, r) in curve.points.iter().zip(pts) {
            println!("  OSNR {:4.1} dB  BER {:.3e}  ({} errors)", p.0, p.1, r.bit_errors);
        }
        match (row.r_osnr_db, row.penalty_db) {
            (Some(r), Some(p)) => println!("  required OSNR {r:.2} dB, penalty {p:+.2} dB"),
            _ => println!("  {}", row.note),
        }
    }
    Ok(())
}
