use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use coofdm::channel::{run_channel, ChannelConfig};
use coofdm::harness::{
    emit_trial_plots, run_sweep, run_trial_detailed, transmit, write_report, write_sweep,
    write_sync_traces, ScenarioConfig, SweepField,
};
use coofdm::sync::{synchronize, AlphaPolicy};
use coofdm::waveform::{export_waveform, import_waveform};
use coofdm::Error;

#[derive(Parser)]
#[command(name = "coofdm", version, about = "Coherent optical OFDM synchronization simulator")]
struct Cli {
    /// Scenario file (TOML); flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a frame and write it as four ASCII column files.
    Generate {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        payload_symbols: Option<usize>,
        /// Trial index whose payload bits to use.
        #[arg(long, default_value_t = 0)]
        trial: usize,
    },
    /// Apply channel impairments to a waveform file set.
    Impair {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        ch: ChannelFlags,
    },
    /// Synchronize a waveform file set and write the report and traces.
    Sync {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        alpha: Option<usize>,
        /// Search the DGD hint over 0..=N instead of using a fixed value.
        #[arg(long)]
        alpha_search: Option<usize>,
    },
    /// Run one end-to-end trial and write its plot data.
    Run {
        #[arg(long, default_value_t = 0)]
        trial: usize,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[command(flatten)]
        ch: ChannelFlags,
    },
    /// Run a Monte-Carlo sweep over one channel field.
    Sweep {
        /// One of osnr_db, dgd_samples, sco_ppm, cfo_hz.
        #[arg(long)]
        field: Option<String>,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[command(flatten)]
        ch: ChannelFlags,
    },
}

#[derive(Args)]
struct ChannelFlags {
    #[arg(long)]
    delay_samples: Option<usize>,
    #[arg(long)]
    dgd_samples: Option<usize>,
    #[arg(long)]
    cfo_hz: Option<f64>,
    #[arg(long)]
    sco_ppm: Option<f64>,
    #[arg(long)]
    osnr_db: Option<f64>,
    #[arg(long)]
    noise_seed: Option<u64>,
}

impl ChannelFlags {
    fn apply(&self, ch: &mut ChannelConfig) {
        if let Some(v) = self.delay_samples {
            ch.delay_samples = v;
        }
        if let Some(v) = self.dgd_samples {
            ch.dgd_samples = v;
        }
        if let Some(v) = self.cfo_hz {
            ch.cfo_hz = v;
        }
        if let Some(v) = self.sco_ppm {
            ch.sco_ppm = v;
        }
        if let Some(v) = self.osnr_db {
            ch.osnr_db = Some(v);
        }
        if let Some(v) = self.noise_seed {
            ch.noise_seed = v;
        }
    }
}

enum Fail {
    Config(Error),
    NoFrame(Error),
    Io(Error),
    Other(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        match e {
            Error::Io { .. } | Error::Parse { .. } => Fail::Io(e),
            Error::NoFrame { .. } => Fail::NoFrame(e),
            Error::Config(_) | Error::Param(_) => Fail::Config(e),
            _ => Fail::Other(e),
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<ScenarioConfig, Fail> {
    match path {
        None => Ok(ScenarioConfig::default()),
        Some(p) => ScenarioConfig::load(p).map_err(|e| match e {
            Error::Io { .. } => Fail::Io(e),
            other => Fail::Config(other),
        }),
    }
}

fn run(cli: Cli) -> Result<(), Fail> {
    let mut cfg = load_config(cli.config.as_deref())?;
    match cli.cmd {
        Cmd::Generate {
            out,
            payload_symbols,
            trial,
        } => {
            if let Some(n) = payload_symbols {
                cfg.params.payload_symbols = n;
            }
            cfg.tail_samples = 0;
            cfg.validate()?;
            let training = cfg.training()?;
            let (_, _, w) = transmit(&cfg, &training, trial)?;
            export_waveform(&w, &out)?;
            println!("samples={}", w.len());
        }
        Cmd::Impair { input, out, ch } => {
            let mut c = cfg.channel.clone();
            ch.apply(&mut c);
            let w = import_waveform(&input, cfg.params.sample_rate_hz)?;
            let r = run_channel(&w, &c)?;
            export_waveform(&r, &out)?;
            println!("samples={}", r.len());
        }
        Cmd::Sync {
            input,
            out_dir,
            alpha,
            alpha_search,
        } => {
            let training = cfg.training()?;
            let r = import_waveform(&input, cfg.params.sample_rate_hz)?;
            let mut s = cfg.sync.clone();
            s.keep_traces = true;
            if let Some(a) = alpha {
                s.alpha = AlphaPolicy::Fixed(a);
            }
            if let Some(m) = alpha_search {
                s.alpha = AlphaPolicy::Search { max: m };
            }
            let res = synchronize(&r, &cfg.params, &training, &s)?;
            let dir = out_dir.unwrap_or_else(|| cfg.resolve_output_dir());
            std::fs::create_dir_all(&dir).map_err(|e| Error::Io { path: dir.clone(), source: e })?;
            write_report(&dir.join("sync_report.txt"), &res)?;
            write_sync_traces(&dir, &res)?;
            println!(
                "d_hat_x={} cfo_total_hz={} sco_ppm={}",
                res.d_hat_x,
                res.cfo.total_hz,
                res.sco.as_ref().map_or(0.0, |s| s.gamma * 1e6)
            );
        }
        Cmd::Run { trial, out_dir, ch } => {
            ch.apply(&mut cfg.channel);
            cfg.validate()?;
            let o = run_trial_detailed(&cfg, trial)?;
            let dir = out_dir.unwrap_or_else(|| cfg.resolve_output_dir());
            emit_trial_plots(&o, &cfg.params, &dir)?;
            let r = &o.report;
            println!(
                "status={} frame_error={} ber={} d_hat_x={:?}",
                r.status, r.frame_error, r.ber, r.d_hat_x
            );
            if r.status == "no_frame" {
                return Err(Fail::NoFrame(Error::NoFrame {
                    peak: 0.0,
                    threshold: cfg.sync.threshold,
                }));
            }
        }
        Cmd::Sweep {
            field,
            values,
            trials,
            seed,
            out_dir,
            ch,
        } => {
            ch.apply(&mut cfg.channel);
            if let Some(t) = trials {
                cfg.trials = t;
            }
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            cfg.validate()?;
            let spec = cfg.sweep.clone();
            let field: SweepField = match (field, &spec) {
                (Some(f), _) => f.parse()?,
                (None, Some(s)) => s.field,
                (None, None) => return Err(Fail::Config(Error::Config("no sweep field given".into()))),
            };
            let values = match (values, &spec) {
                (Some(v), _) => v,
                (None, Some(s)) => s.values.clone(),
                (None, None) => return Err(Fail::Config(Error::Config("no sweep values given".into()))),
            };
            let out = run_sweep(&cfg, field, &values)?;
            let dir = out_dir.unwrap_or_else(|| cfg.resolve_output_dir());
            write_sweep(&cfg, &out, &dir)?;
            for r in &out.rows {
                println!(
                    "{}={} fer={} cfo_mse={:.3e} ber={:.3e}",
                    field.name(),
                    r.value,
                    r.frame_error_rate,
                    r.cfo_mse,
                    r.ber
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (code, e) = match f {
                Fail::Config(e) => (2, e),
                Fail::NoFrame(e) => (3, e),
                Fail::Io(e) => (4, e),
                Fail::Other(e) => (1, e),
            };
            eprintln!("coofdm: {e}");
            ExitCode::from(code)
        }
    }
}
