//! Gray-coded 16-QAM with unit average energy.

use num_complex::Complex64;

const SCALE: f64 = 0.316_227_766_016_837_94; // 1/sqrt(10)

/// Gray level for a bit pair: 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3.
fn level(b0: u8, b1: u8) -> f64 {
    match (b0 & 1, b1 & 1) {
        (0, 0) => -3.0,
        (0, 1) => -1.0,
        (1, 1) => 1.0,
        _ => 3.0,
    }
}

fn bits_of_level(idx: usize) -> [u8; 2] {
    [[0, 0], [0, 1], [1, 1], [1, 0]][idx]
}

fn nearest_level(v: f64) -> usize {
    let u = v / SCALE;
    if u < -2.0 {
        0
    } else if u < 0.0 {
        1
    } else if u < 2.0 {
        2
    } else {
        3
    }
}

/// Maps four bits (I pair then Q pair) to a constellation point.
pub fn map4(b: &[u8]) -> Complex64 {
    Complex64::new(level(b[0], b[1]) * SCALE, level(b[2], b[3]) * SCALE)
}

/// Hard decision to the nearest constellation point.
pub fn decide(z: Complex64) -> Complex64 {
    let lv = [-3.0, -1.0, 1.0, 3.0];
    Complex64::new(
        lv[nearest_level(z.re)] * SCALE,
        lv[nearest_level(z.im)] * SCALE,
    )
}

/// Hard-decision demapping of one sample into four bits.
pub fn demap4(z: Complex64, out: &mut Vec<u8>) {
    out.extend_from_slice(&bits_of_level(nearest_level(z.re)));
    out.extend_from_slice(&bits_of_level(nearest_level(z.im)));
}

/// All 16 points indexed by their 4-bit label (MSB first).
pub fn constellation() -> [Complex64; 16] {
    std::array::from_fn(|i| {
        let b = [(i >> 3) as u8 & 1, (i >> 2) as u8 & 1, (i >> 1) as u8 & 1, i as u8 & 1];
        map4(&b)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_energy() {
        let e: f64 = constellation().iter().map(|z| z.norm_sqr()).sum::<f64>() / 16.0;
        assert!((e - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gray_neighbours_differ_in_one_bit() {
        let pts = constellation();
        let dmin = 2.0 * SCALE;
        for i in 0..16 {
            for j in 0..16 {
                if (pts[i] - pts[j]).norm() < dmin * 1.01 && i != j {
                    assert_eq!((i ^ j).count_ones(), 1, "{i} {j}");
                }
            }
        }
    }

    #[test]
    fn round_trip_all_labels() {
        for (i, p) in constellation().iter().enumerate() {
            let mut bits = Vec::new();
            demap4(*p, &mut bits);
            let label = bits.iter().fold(0usize, |a, &b| (a << 1) | b as usize);
            assert_eq!(label, i);
            assert_eq!(decide(*p * 1.05), *p);
        }
    }
}
