use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{plot, run_trial_with, ScenarioConfig, SweepField, TrialReport};
use crate::error::{Error, Result};
use crate::metrics::{cfo_mse, osnr_penalty, r_osnr, BerCurve};

/// Bit-error count below which a BER point is flagged.
pub const CONFIDENT_ERRORS: u64 = 100;

/// Aggregate of all trials at one swept value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub trials: usize,
    pub frame_errors: usize,
    pub frame_error_rate: f64,
    pub cfo_mse: f64,
    pub cfo_max_abs_err_hz: f64,
    pub ber: f64,
    pub bit_errors: u64,
    pub bits: u64,
    pub mean_evm_percent: f64,
    pub mean_sco_est_ppm: f64,
    pub low_confidence: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PenaltyRow {
    pub value: f64,
    pub r_osnr_db: Option<f64>,
    pub penalty_db: Option<f64>,
    pub note: String,
}

#[derive(Clone, Debug)]
pub struct SweepOutput {
    pub field: SweepField,
    pub rows: Vec<SweepRow>,
    pub trials: Vec<(f64, TrialReport)>,
    pub curve: Option<BerCurve>,
    pub penalty: Vec<PenaltyRow>,
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

fn aggregate(value: f64, reports: &[TrialReport], spacing_hz: f64) -> SweepRow {
    let est: Vec<f64> = reports.iter().filter_map(|r| r.cfo_est_hz).collect();
    let truth = reports.first().map_or(0.0, |r| r.cfo_hz);
    let frame_errors = reports.iter().filter(|r| r.frame_error).count();
    let bit_errors: u64 = reports.iter().map(|r| r.bit_errors).sum();
    let bits: u64 = reports.iter().map(|r| r.bits).sum();
    SweepRow {
        value,
        trials: reports.len(),
        frame_errors,
        frame_error_rate: frame_errors as f64 / reports.len().max(1) as f64,
        cfo_mse: cfo_mse(&est, truth, spacing_hz),
        cfo_max_abs_err_hz: est.iter().map(|e| (e - truth).abs()).fold(0.0, f64::max),
        ber: if bits == 0 { f64::NAN } else { bit_errors as f64 / bits as f64 },
        bit_errors,
        bits,
        mean_evm_percent: mean(reports.iter().filter_map(|r| r.evm_percent)),
        mean_sco_est_ppm: mean(reports.iter().filter_map(|r| r.sco_est_ppm)),
        low_confidence: bit_errors < CONFIDENT_ERRORS,
    }
}

/// Runs the configured trials (more when `min_bit_errors` asks for them)
/// and aggregates them. Trials execute in parallel; results are ordered by
/// trial index.
pub fn run_point(cfg: &ScenarioConfig) -> Result<(SweepRow, Vec<TrialReport>)> {
    let training = cfg.training()?;
    let batch = cfg.trials;
    let cap = cfg.max_trials.max(batch);
    let mut reports: Vec<TrialReport> = Vec::new();
    loop {
        let start = reports.len();
        let end = (start + batch).min(cap);
        let mut more: Vec<TrialReport> = (start..end)
            .into_par_iter()
            .map(|i| run_trial_with(cfg, &training, i, false).report)
            .collect();
        reports.append(&mut more);
        let errors: u64 = reports.iter().map(|r| r.bit_errors).sum();
        let enough = cfg.min_bit_errors.is_none_or(|m| errors >= m);
        if enough || reports.len() >= cap {
            break;
        }
    }
    let value = f64::NAN;
    Ok((aggregate(value, &reports, cfg.params.subcarrier_spacing_hz()), reports))
}

fn with_value(cfg: &ScenarioConfig, field: SweepField, v: f64) -> Result<ScenarioConfig> {
    let mut c = cfg.clone();
    field.apply(&mut c.channel, v)?;
    Ok(c)
}

fn ber_curve(cfg: &ScenarioConfig, osnr: &[f64], label: String) -> Result<(BerCurve, Vec<SweepRow>)> {
    let mut rows = Vec::new();
    for &o in osnr {
        let c = with_value(cfg, SweepField::OsnrDb, o)?;
        let (mut row, _) = run_point(&c)?;
        row.value = o;
        rows.push(row);
    }
    let curve = BerCurve::new(rows.iter().map(|r| (r.value, r.ber)).collect(), label)?;
    Ok((curve, rows))
}

/// A BER curve with the aggregate row behind each point.
pub type CurvePoints = (BerCurve, Vec<SweepRow>);

/// BER curve over `osnr_grid` for every value of `field`, with the penalty
/// at `target_ber` relative to the first value.
pub fn run_penalty_table(
    cfg: &ScenarioConfig,
    field: SweepField,
    values: &[f64],
    osnr_grid: &[f64],
    target_ber: f64,
) -> Result<(Vec<PenaltyRow>, Vec<CurvePoints>)> {
    let mut curves = Vec::new();
    for &v in values {
        let c = with_value(cfg, field, v)?;
        curves.push(ber_curve(&c, osnr_grid, format!("{}={v}", field.name()))?);
    }
    let mut rows = Vec::new();
    for (v, (curve, _)) in values.iter().zip(&curves) {
        let r = r_osnr(curve, target_ber);
        let p = osnr_penalty(curve, &curves[0].0, target_ber);
        let note = match (&r, &p) {
            (Err(e), _) | (_, Err(e)) => e.to_string(),
            _ => String::new(),
        };
        rows.push(PenaltyRow {
            value: *v,
            r_osnr_db: r.ok(),
            penalty_db: p.ok(),
            note,
        });
    }
    Ok((rows, curves))
}

/// Runs one sweep; see [`write_sweep`] for the files it produces.
pub fn run_sweep(cfg: &ScenarioConfig, field: SweepField, values: &[f64]) -> Result<SweepOutput> {
    if values.is_empty() {
        return Err(Error::Config("sweep needs at least one value".into()));
    }
    let spec = cfg.sweep.as_ref();
    let target = spec.map_or(super::DEFAULT_TARGET_BER, |s| s.target_ber);
    let mut rows = Vec::new();
    let mut trials = Vec::new();
    for &v in values {
        let c = with_value(cfg, field, v)?;
        let (mut row, reps) = run_point(&c)?;
        row.value = v;
        rows.push(row);
        trials.extend(reps.into_iter().map(|r| (v, r)));
    }
    let mut curve = None;
    let mut penalty = Vec::new();
    if field == SweepField::OsnrDb {
        let c = BerCurve::new(rows.iter().map(|r| (r.value, r.ber)).collect(), cfg.name.clone())?;
        if let Some(base) = spec.and_then(|s| s.baseline_curve.as_ref()) {
            let b = read_ber_curve(base)?;
            let r = r_osnr(&c, target);
            let p = osnr_penalty(&c, &b, target);
            penalty.push(PenaltyRow {
                value: target,
                r_osnr_db: r.as_ref().ok().copied(),
                penalty_db: p.as_ref().ok().copied(),
                note: match (r, p) {
                    (Err(e), _) | (_, Err(e)) => e.to_string(),
                    _ => String::new(),
                },
            });
        }
        curve = Some(c);
    } else if let Some(grid) = spec.and_then(|s| s.osnr_grid_db.as_ref()) {
        penalty = run_penalty_table(cfg, field, values, grid, target)?.0;
    }
    Ok(SweepOutput {
        field,
        rows,
        trials,
        curve,
        penalty,
    })
}

#[derive(Deserialize)]
struct CurveRow {
    osnr_db: f64,
    ber: f64,
}

/// Reads a `ber_curve.csv` written by [`write_sweep`].
pub fn read_ber_curve(path: &Path) -> Result<BerCurve> {
    let mut rd = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut pts = Vec::new();
    for row in rd.deserialize::<CurveRow>() {
        let r = row.map_err(|e| csv_err(path, e))?;
        pts.push((r.osnr_db, r.ber));
    }
    BerCurve::new(pts, path.display().to_string())
}

pub(crate) fn csv_err(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse {
            path: path.to_path_buf(),
            line,
            msg: format!("{other:?}"),
        },
    }
}

/// Writes `sweep_<field>.csv`, `trials_<field>.csv`, and when available
/// `ber_curve.csv` and `penalty_<field>.csv`, plus constellation dumps when
/// the sweep spec asks for them.
pub fn write_sweep(cfg: &ScenarioConfig, out: &SweepOutput, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let name = out.field.name();
    plot::write_rows(&dir.join(format!("sweep_{name}.csv")), &out.rows)?;
    plot::write_trial_rows(&dir.join(format!("trials_{name}.csv")), &out.trials)?;
    if let Some(c) = &out.curve {
        #[derive(Serialize)]
        struct Row {
            osnr_db: f64,
            ber: f64,
            bit_errors: u64,
            low_confidence: bool,
        }
        let rows: Vec<Row> = c
            .points
            .iter()
            .zip(&out.rows)
            .map(|(p, r)| Row {
                osnr_db: p.0,
                ber: p.1,
                bit_errors: r.bit_errors,
                low_confidence: r.low_confidence,
            })
            .collect();
        plot::write_rows(&dir.join("ber_curve.csv"), &rows)?;
    }
    if !out.penalty.is_empty() {
        plot::write_rows(&dir.join(format!("penalty_{name}.csv")), &out.penalty)?;
    }
    if cfg.sweep.as_ref().is_some_and(|s| s.constellations) {
        for row in &out.rows {
            let c = with_value(cfg, out.field, row.value)?;
            let o = super::run_trial_detailed(&c, 0)?;
            if let Some(rx) = &o.reception {
                let f = dir.join(format!("constellation_{name}_{}.csv", row.value));
                plot::write_constellation(&f, &rx.payload, &c.params)?;
            }
        }
    }
    Ok(())
}
