//! Single-column ASCII waveform files.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::frame::DualPolWaveform;

const SUFFIXES: [&str; 4] = ["xi", "xq", "yi", "yq"];

/// Paths `<base>_xi.txt`, `<base>_xq.txt`, `<base>_yi.txt`, `<base>_yq.txt`.
pub fn waveform_paths(base: &Path) -> [PathBuf; 4] {
    let stem = base.as_os_str().to_string_lossy().into_owned();
    SUFFIXES.map(|s| PathBuf::from(format!("{stem}_{s}.txt")))
}

/// Writes the four columns with 16 significant digits.
pub fn export_waveform(w: &DualPolWaveform, base: &Path) -> Result<()> {
    export_waveform_with_precision(w, base, 16)
}

/// Writes the four columns in scientific notation with `digits` significant digits.
pub fn export_waveform_with_precision(
    w: &DualPolWaveform,
    base: &Path,
    digits: usize,
) -> Result<()> {
    let digits = digits.max(1);
    for (i, path) in waveform_paths(base).iter().enumerate() {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        let stream = if i < 2 { &w.x } else { &w.y };
        for v in stream {
            let c = if i % 2 == 0 { v.re } else { v.im };
            writeln!(out, "{:.*e}", digits - 1, c).map_err(|e| Error::io(path, e))?;
        }
        out.flush().map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

fn read_column(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .map(|(i, line)| {
            let mut fields = line.split_whitespace();
            let parse_err = |msg: String| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                msg,
            };
            let first = fields
                .next()
                .ok_or_else(|| parse_err("empty line".into()))?;
            if fields.next().is_some() {
                return Err(parse_err("expected exactly one column".into()));
            }
            first
                .parse::<f64>()
                .map_err(|e| parse_err(format!("not a number {first:?}: {e}")))
        })
        .collect()
}

/// Reads the four columns written by [`export_waveform`].
pub fn import_waveform(base: &Path, sample_rate_hz: f64) -> Result<DualPolWaveform> {
    let [xi, xq, yi, yq] = waveform_paths(base).map(|p| read_column(&p));
    let (xi, xq, yi, yq) = (xi?, xq?, yi?, yq?);
    for c in [&xq, &yi, &yq] {
        if c.len() != xi.len() {
            return Err(Error::Length {
                expected: xi.len(),
                actual: c.len(),
            });
        }
    }
    let join = |i: &[f64], q: &[f64]| -> Vec<Complex64> {
        i.iter().zip(q).map(|(&a, &b)| Complex64::new(a, b)).collect()
    };
    DualPolWaveform::new(join(&xi, &xq), join(&yi, &yq), sample_rate_hz)
}
