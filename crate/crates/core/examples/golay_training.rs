//! Golay complementary pairs and the Alamouti training grid.

use coofdm::golay::{aperiodic_autocorr, golay_parent, is_complementary};
use coofdm::prelude::*;

fn main() -> coofdm::Result<()> {
    for k in 1..=9 {
        let (a, b) = golay_parent(k)?;
        let ra = aperiodic_autocorr(&a);
        let rb = aperiodic_autocorr(&b);
        let side = ra.iter().zip(&rb).skip(1).map(|(x, y)| (x + y).abs()).max().unwrap_or(0);
        println!(
            "length {:4}: zero-lag sum {:5}, max sidelobe sum {}, complementary {}",
            a.len(),
            ra[0] + rb[0],
            side,
            is_complementary(&a, &b)
        );
    }

    let params = OfdmParams::paper();
    let t = build_training_symbols(&params, DEFAULT_PN_SEED)?;
    let (a4, b4) = golay_pair(2, 4)?;
    println!("order-2 pair: A={a4:?} B={b4:?}");
    println!("training length {} per sequence", t.seq_a.len());
    let names = [["x: A", "y: B"], ["x: -B*", "y: A*"]];
    for (s, row) in names.iter().enumerate() {
        for (p, name) in row.iter().enumerate() {
            let td = &t.time_domain[s][p];
            let cp_ok = td[..params.n_cp] == td[params.n_fft..];
            let energy: f64 = td[params.n_cp..].iter().map(|v| v.norm_sqr()).sum();
            println!(
                "symbol {} {:7}  {} samples, prefix valid {}, useful energy {:.1}",
                s + 1,
                name,
                td.len(),
                cp_ok,
                energy
            );
        }
    }
    let head: Vec<i32> = t.pn[..16].iter().map(|&v| v as i32).collect();
    println!("weighting sequence head {head:?}");
    Ok(())
}
