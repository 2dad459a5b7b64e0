//! Plot-ready CSV files and the key-value sync report.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::sweep::csv_err;
use super::{TrialOutcome, TrialReport};
use crate::error::{Error, Result};
use crate::params::OfdmParams;
use crate::receiver::SubcarrierGrid;
use crate::sync::SyncResult;

fn create(path: &Path) -> Result<fs::File> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::File::create(path).map_err(|e| Error::io(path, e))
}

/// One CSV row per element, header from the field names.
pub fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    write_rows_to(path, create(path)?, rows)
}

fn write_rows_to<T: Serialize, W: Write>(path: &Path, w: W, rows: &[T]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r).map_err(|e| csv_err(path, e))?;
    }
    wr.flush().map_err(|e| Error::io(path, e))
}

fn report_columns() -> Vec<String> {
    let mut wr = csv::Writer::from_writer(Vec::new());
    let probe = super::failed_report(
        &super::ScenarioConfig::default(),
        &crate::channel::ChannelConfig::default(),
        0,
        String::new(),
    );
    wr.serialize(&probe).expect("in-memory csv");
    let bytes = wr.into_inner().expect("in-memory csv");
    let text = String::from_utf8(bytes).expect("utf8 header");
    text.lines()
        .next()
        .unwrap_or_default()
        .split(',')
        .map(str::to_string)
        .collect()
}

/// Per-trial reports with the swept value as the first column.
pub fn write_trial_rows(path: &Path, rows: &[(f64, TrialReport)]) -> Result<()> {
    let mut wr = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(create(path)?);
    let mut header = vec!["value".to_string()];
    header.extend(report_columns());
    wr.write_record(&header).map_err(|e| csv_err(path, e))?;
    for r in rows {
        wr.serialize(r).map_err(|e| csv_err(path, e))?;
    }
    wr.flush().map_err(|e| Error::io(path, e))
}

/// Columns `symbol,subcarrier,pol,i,q`: one row per symbol, occupied
/// subcarrier and polarization.
pub fn write_constellation(path: &Path, grid: &SubcarrierGrid, params: &OfdmParams) -> Result<()> {
    #[derive(Serialize)]
    struct Row {
        symbol: usize,
        subcarrier: i64,
        pol: char,
        i: f64,
        q: f64,
    }
    let mut rows = Vec::new();
    let signed = params.occupied_signed();
    let bins = params.occupied_bins();
    for s in 0..grid.n_symbols() {
        for (k, &b) in signed.iter().zip(&bins) {
            for (p, name) in [(0, 'x'), (1, 'y')] {
                let v = grid.pol(p)[s][b];
                rows.push(Row {
                    symbol: s,
                    subcarrier: *k,
                    pol: name,
                    i: v.re,
                    q: v.im,
                });
            }
        }
    }
    write_rows(path, &rows)
}

/// `key=value` lines summarizing a sync result.
pub fn write_report(path: &Path, s: &SyncResult) -> Result<()> {
    let mut lines = vec![
        format!("d_hat_x={}", s.d_hat_x),
        format!("d_hat_y={}", s.d_hat_y),
        format!("alpha_used={}", s.alpha_used),
        format!("peak_value={}", s.peak_value),
        format!("cfo_integer={}", s.cfo.integer),
        format!("cfo_fractional={}", s.cfo.fractional),
        format!("cfo_total_hz={}", s.cfo.total_hz),
    ];
    if let Some(sco) = &s.sco {
        lines.push(format!("sco_slope_m={}", sco.slope_m));
        lines.push(format!("sco_gamma={}", sco.gamma));
        lines.push(format!("sco_iterations={}", sco.iterations));
        lines.push(format!("sco_residual_gamma={}", sco.residual_gamma));
    }
    let f = &s.flags;
    lines.push(format!("flag_fractional_low_confidence={}", f.fractional_low_confidence));
    lines.push(format!("flag_integer_at_edge={}", f.integer_at_edge));
    lines.push(format!("flag_polarization_disagreement={}", f.polarization_disagreement));
    lines.push(format!("flag_sco_not_converged={}", f.sco_not_converged));
    lines.push(format!("flag_sco_failed={}", f.sco_failed));
    let mut file = create(path)?;
    for l in lines {
        writeln!(file, "{l}").map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

/// Writes the trace files of a sync result into `dir`:
/// `timing_trace.csv` (`d,metric_x,metric_y`, y sampled at `d + α`),
/// `integer_cfo.csv` (`shift,magnitude`) and `sco_phase.csv`
/// (`subcarrier,pol,phase,fit` after `#` lines carrying the fit parameters).
pub fn write_sync_traces(dir: &Path, s: &SyncResult) -> Result<()> {
    let Some(t) = &s.traces else {
        return Ok(());
    };
    #[derive(Serialize)]
    struct Timing {
        d: usize,
        metric_x: f64,
        metric_y: Option<f64>,
    }
    let (lo, hi) = t.timing_x.search_range;
    let rows: Vec<Timing> = (lo..=hi)
        .map(|d| Timing {
            d,
            metric_x: t.timing_x.value_at(d).unwrap_or(0.0),
            metric_y: t.timing_y.value_at(d + s.alpha_used),
        })
        .collect();
    write_rows(&dir.join("timing_trace.csv"), &rows)?;

    #[derive(Serialize)]
    struct Corr {
        shift: i64,
        magnitude: f64,
    }
    let q_max = t.integer_cfo.q_max as i64;
    let rows: Vec<Corr> = t
        .integer_cfo
        .correlation
        .iter()
        .enumerate()
        .map(|(i, &m)| Corr {
            shift: i as i64 - q_max,
            magnitude: m,
        })
        .collect();
    write_rows(&dir.join("integer_cfo.csv"), &rows)?;

    if let Some(fit) = &t.sco_fit {
        #[derive(Serialize)]
        struct Phase {
            subcarrier: i64,
            pol: char,
            phase: f64,
            fit: f64,
        }
        let path = dir.join("sco_phase.csv");
        let mut file = create(&path)?;
        let mut head = format!("# slope_m={}\n# gamma={}\n# r_squared={}\n", fit.slope_m, fit.gamma, fit.r_squared);
        for (c, name) in fit.intercepts.iter().zip(['x', 'y']) {
            head.push_str(&format!("# intercept_{name}={c}\n"));
        }
        file.write_all(head.as_bytes()).map_err(|e| Error::io(&path, e))?;
        let mut rows = Vec::new();
        for ((ks, ph), (c, name)) in fit.subcarriers.iter().zip(&fit.phases).zip(fit.intercepts.iter().zip(['x', 'y'])) {
            for (&k, &p) in ks.iter().zip(ph) {
                rows.push(Phase {
                    subcarrier: k,
                    pol: name,
                    phase: p,
                    fit: fit.slope_m * k as f64 + c,
                });
            }
        }
        write_rows_to(&path, file, &rows)?;
    }
    Ok(())
}

/// Report, traces and constellation of a detailed trial.
pub fn emit_trial_plots(o: &TrialOutcome, params: &OfdmParams, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_rows(&dir.join("trial.csv"), std::slice::from_ref(&o.report))?;
    if let Some(s) = &o.sync {
        write_report(&dir.join("sync_report.txt"), s)?;
        write_sync_traces(dir, s)?;
    }
    if let Some(rx) = &o.reception {
        write_constellation(&dir.join("constellation.csv"), &rx.payload, params)?;
    }
    Ok(())
}
