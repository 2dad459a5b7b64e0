//! Golay complementary pairs by recursive doubling.

use crate::error::{Error, Result};

/// Largest exponent accepted by [`golay_pair`] (length 2^20).
pub const MAX_EXPONENT: u32 = 20;

/// Full-length pair of order `k` (length `2^k`): `A' = A|B`, `B' = A|-B` from `([1], [1])`.
pub fn golay_parent(k: u32) -> Result<(Vec<i8>, Vec<i8>)> {
    if k == 0 || k > MAX_EXPONENT {
        return Err(Error::Param(format!(
            "golay exponent {k} outside 1..={MAX_EXPONENT}"
        )));
    }
    let mut a = vec![1i8];
    let mut b = vec![1i8];
    for _ in 0..k {
        let mut a2 = a.clone();
        a2.extend_from_slice(&b);
        let mut b2 = a;
        b2.extend(b.iter().map(|v| -v));
        a = a2;
        b = b2;
    }
    Ok((a, b))
}

/// Pair of length `n_sc`: the first `n_sc` entries of the order-`k` parents.
pub fn golay_pair(k: u32, n_sc: usize) -> Result<(Vec<i8>, Vec<i8>)> {
    if k == 0 || k > MAX_EXPONENT {
        return Err(Error::Param(format!(
            "golay exponent {k} outside 1..={MAX_EXPONENT}"
        )));
    }
    if n_sc == 0 || n_sc > 1usize << k {
        return Err(Error::Param(format!("n_sc {n_sc} exceeds 2^{k}")));
    }
    let (mut a, mut b) = golay_parent(k)?;
    a.truncate(n_sc);
    b.truncate(n_sc);
    Ok((a, b))
}

/// Aperiodic autocorrelation for lags `0..len`.
pub fn aperiodic_autocorr(s: &[i8]) -> Vec<i64> {
    (0..s.len())
        .map(|k| {
            s[..s.len() - k]
                .iter()
                .zip(&s[k..])
                .map(|(&u, &v)| u as i64 * v as i64)
                .sum()
        })
        .collect()
}

/// True when the summed autocorrelations equal `2·len` at lag 0 and vanish elsewhere.
pub fn is_complementary(a: &[i8], b: &[i8]) -> bool {
    if a.len() != b.len() || a.is_empty() {
        return false;
    }
    let ra = aperiodic_autocorr(a);
    let rb = aperiodic_autocorr(b);
    ra.iter().zip(&rb).enumerate().all(|(k, (x, y))| {
        let s = x + y;
        if k == 0 {
            s == 2 * a.len() as i64
        } else {
            s == 0
        }
    })
}
