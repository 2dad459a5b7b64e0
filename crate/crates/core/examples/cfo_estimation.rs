//! Fractional and integer carrier-offset recovery over a range of offsets.

use coofdm::prelude::*;

fn main() -> coofdm::Result<()> {
    let mut params = OfdmParams::paper();
    params.payload_symbols = 2;
    let df = params.subcarrier_spacing_hz();
    let training = build_training_symbols(&params, DEFAULT_PN_SEED)?;
    let bits = random_bits(11, frame_bits(&params));
    let tx = modulate_frame(&training, &map_dual_payload(&bits, &params)?, &params)?;
    println!("subcarrier spacing {:.6} MHz", df / 1e6);
    println!("{:>12} {:>10} {:>8} {:>11} {:>11}", "injected Hz", "in Δf", "integer", "fractional", "error Hz");
    for cfo in [0.0, 0.2 * df, -0.45 * df, 7.3 * df, 2.5e9, -2.9e9, 60.0 * df] {
        let ch = ChannelConfig {
            delay_samples: 150,
            cfo_hz: cfo,
            ..Default::default()
        };
        let mut rx = run_channel(&tx, &ch)?;
        rx.pad_tail(64);
        let s = synchronize(&rx, &params, &training, &SyncConfig::default())?;
        println!(
            "{:>12.4e} {:>10.3} {:>8} {:>11.4} {:>11.1}",
            cfo,
            cfo / df,
            s.cfo.integer,
            s.cfo.fractional,
            s.cfo.total_hz - cfo
        );
    }
    Ok(())
}
