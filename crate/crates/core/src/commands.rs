//! The operations behind the `qsdc` binary: `simulate`, `spectrum`,
//! `security` and `capacity`.
//!
//! Every command reads an optional JSON [`RunConfig`], applies flag
//! overrides, validates, and writes its results under `--out`. Output is a
//! pure function of the effective config.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use crate::codec::{
    combinatorial_capacity, dtft, transmission_rate_log2, Capacity, CodecError, FrequencyGrid,
    Spectrum,
};
use crate::config::{ConfigError, RunConfig};
use crate::output::{sig9, write_csv};
use crate::protocol::{
    run_block_with_tones, run_session, Eavesdropper, ProtocolError, SessionOptions,
    SessionReport, SessionStatus, Verdict,
};
use crate::rng::derive_seed;
use crate::security::security_sweep;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const IO: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const PROTOCOL_ABORT: i32 = 3;
    pub const DECODE_FAILURE: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl CommandError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Config(ConfigError::Io { .. }) | CommandError::Io { .. } => exit::IO,
            CommandError::Config(_) | CommandError::Usage(_) => exit::CONFIG,
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CommandError {
    CommandError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn protocol_err(e: ProtocolError) -> CommandError {
    CommandError::Usage(e.to_string())
}

#[derive(Debug, Parser)]
#[command(
    name = "qsdc",
    version,
    about = "Two-way single-photon secure direct communication with frequency coding"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Send the configured message block by block and write the transcript.
    Simulate(SimulateArgs),
    /// Run one block per grid frequency and write its spectrum.
    Spectrum(SpectrumArgs),
    /// Sweep mean photon number and distance against the eavesdropper bound.
    Security(SecurityArgs),
    /// Print channel count, combinations, bits per block and rate.
    Capacity(CapacityArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON run configuration; defaults to the experimental operating point.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Overrides for `channel.*`.
#[derive(Debug, Clone, Default, Args)]
pub struct ChannelArgs {
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub alpha_db_per_km: Option<f64>,
    #[arg(long)]
    pub l1_km: Option<f64>,
    #[arg(long)]
    pub l2_km: Option<f64>,
    #[arg(long)]
    pub eta_det: Option<f64>,
    #[arg(long)]
    pub error_rate: Option<f64>,
    #[arg(long)]
    pub check_fraction: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[arg(long)]
    pub message: Option<String>,
    #[arg(long)]
    pub n2: Option<usize>,
    #[arg(long)]
    pub error_threshold: Option<f64>,
    /// none, intercept_resend_forward or flip_backward.
    #[arg(long, value_parser = parse_eavesdropper)]
    pub eavesdropper: Option<Eavesdropper>,
    #[arg(long)]
    pub max_retries: Option<u32>,
    /// Leave per-block transcripts out of the output.
    #[arg(long)]
    pub summary_only: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[arg(long)]
    pub n2: Option<usize>,
    #[arg(long)]
    pub oversample: Option<usize>,
    #[arg(long)]
    pub max_retries: Option<u32>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SecurityArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Comma-separated mean photon numbers.
    #[arg(long, value_delimiter = ',')]
    pub mu_list: Option<Vec<f64>>,
    /// Comma-separated L1 values in km.
    #[arg(long, value_delimiter = ',')]
    pub l1_grid_km: Option<Vec<f64>>,
    #[arg(long)]
    pub block_photons: Option<usize>,
    #[arg(long)]
    pub bits: Option<u32>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CapacityArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub f_min_hz: Option<f64>,
    #[arg(long)]
    pub f_max_hz: Option<f64>,
    #[arg(long)]
    pub f_b_hz: Option<f64>,
    /// Channel count, bypassing the grid.
    #[arg(long, conflicts_with_all = ["f_min_hz", "f_max_hz", "f_b_hz"])]
    pub channels: Option<usize>,
    /// Tones per block, `r`.
    #[arg(long)]
    pub tones: Option<usize>,
    #[arg(long)]
    pub t_span_s: Option<f64>,
}

fn parse_eavesdropper(s: &str) -> Result<Eavesdropper, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| format!("unknown eavesdropper `{s}`"))
}

fn load(common: &CommonArgs) -> Result<RunConfig, CommandError> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.output.dir = out.clone();
    }
    Ok(cfg)
}

fn apply_channel(cfg: &mut RunConfig, a: &ChannelArgs) {
    let c = &mut cfg.channel;
    let fields = [
        (a.mu, &mut c.mu),
        (a.alpha_db_per_km, &mut c.alpha_db_per_km),
        (a.l1_km, &mut c.l1_km),
        (a.l2_km, &mut c.l2_km),
        (a.eta_det, &mut c.eta_det),
        (a.error_rate, &mut c.error_rate),
        (a.check_fraction, &mut c.check_fraction),
    ];
    for (value, slot) in fields {
        if let Some(v) = value {
            *slot = v;
        }
    }
}

fn prepare_out(dir: &Path) -> Result<(), CommandError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CommandError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| io_err(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn create(path: &Path) -> Result<fs::File, CommandError> {
    fs::File::create(path).map_err(|e| io_err(path, e))
}

/// Result of a command: an exit code plus the files it wrote.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub exit_code: i32,
    pub files: Vec<PathBuf>,
}

#[derive(Serialize)]
struct SimulateOutput<'a> {
    config: &'a RunConfig,
    report: &'a SessionReport,
}

pub fn cmd_simulate(args: &SimulateArgs, log: &mut dyn Write) -> Result<Outcome, CommandError> {
    let mut cfg = load(&args.common)?;
    apply_channel(&mut cfg, &args.channel);
    let p = &mut cfg.protocol;
    if let Some(v) = args.n2 {
        p.n2 = v;
    }
    if let Some(v) = args.error_threshold {
        p.error_threshold = v;
    }
    if let Some(v) = args.eavesdropper {
        p.eavesdropper = v;
    }
    if let Some(v) = args.max_retries {
        p.max_retries = v;
    }
    if let Some(m) = &args.message {
        cfg.message = m.clone();
    }
    if args.summary_only {
        cfg.output.keep_transcripts = false;
    }
    cfg.validate()?;

    let block = cfg.block_config();
    let opts = SessionOptions {
        max_retries: cfg.protocol.max_retries,
        keep_transcripts: cfg.output.keep_transcripts,
    };
    let report = run_session(&block, cfg.message.as_bytes(), opts).map_err(protocol_err)?;

    let dir = cfg.output.dir.clone();
    prepare_out(&dir)?;
    let path = dir.join("transcript.json");
    write_json(
        &path,
        &SimulateOutput {
            config: &cfg,
            report: &report,
        },
    )?;

    let _ = writeln!(
        log,
        "{} block(s) of {} bits, {} sent, {} delivered, throughput {} bps",
        report.blocks,
        report.bits_per_block,
        report.blocks_sent,
        report.blocks_delivered,
        sig9(report.throughput_bps)
    );
    let exit_code = match report.status {
        SessionStatus::Delivered => {
            let _ = writeln!(log, "status: delivered");
            exit::SUCCESS
        }
        SessionStatus::Aborted { block, verdict } => {
            let _ = writeln!(log, "status: aborted at block {block} ({verdict:?})");
            exit::PROTOCOL_ABORT
        }
        SessionStatus::DecodeFailed { block, attempts } => {
            let _ = writeln!(
                log,
                "status: block {block} undecodable after {attempts} attempt(s)"
            );
            exit::DECODE_FAILURE
        }
    };
    Ok(Outcome {
        exit_code,
        files: vec![path],
    })
}

/// One commanded frequency in the `spectrum` summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumRun {
    #[serde(serialize_with = "crate::output::serde_sig9::serialize")]
    pub commanded_hz: f64,
    pub attempts: u32,
    pub seed: u64,
    pub verdict: Verdict,
    pub stream_len: usize,
    #[serde(serialize_with = "crate::output::serde_sig9::option")]
    pub argmax_hz: Option<f64>,
    #[serde(serialize_with = "crate::output::serde_sig9::option")]
    pub snr: Option<f64>,
    /// No records reached the decoder; the spectrum is all zeros.
    pub empty: bool,
    pub argmax_matches: bool,
    pub file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumSummary {
    pub runs: Vec<SpectrumRun>,
    pub all_matched: bool,
}

/// File name for the spectrum of one commanded frequency.
pub fn spectrum_file_name(f_hz: f64) -> String {
    format!("spectrum_{:06}hz.csv", f_hz.round() as u64)
}

pub fn cmd_spectrum(args: &SpectrumArgs, log: &mut dyn Write) -> Result<Outcome, CommandError> {
    let mut cfg = load(&args.common)?;
    apply_channel(&mut cfg, &args.channel);
    if let Some(v) = args.n2 {
        cfg.protocol.n2 = v;
    }
    if let Some(v) = args.oversample {
        cfg.protocol.oversample = v;
    }
    if let Some(v) = args.max_retries {
        cfg.protocol.max_retries = v;
    }
    // One tone per run regardless of the configured codebook.
    cfg.protocol.tones = 1;
    cfg.validate()?;
    let block = cfg.block_config();
    let grid = block.grid;

    let mut runs = Vec::with_capacity(grid.len());
    let mut spectra: Vec<Spectrum> = Vec::with_capacity(grid.len());
    for (i, f) in grid.frequencies().into_iter().enumerate() {
        let mut attempt = 0;
        let (seed, t) = loop {
            let seed = derive_seed(cfg.seed, &[i as u64, u64::from(attempt)]);
            let t = run_block_with_tones(&block.with_seed(seed), &[f]).map_err(protocol_err)?;
            if t.verdict == Verdict::Delivered || attempt >= cfg.protocol.max_retries {
                break (seed, t);
            }
            attempt += 1;
        };
        let spectrum = match t.spectrum.clone() {
            Some(s) => s,
            None => dtft(&t.stream, &grid, block.oversample).map_err(|e: CodecError| {
                CommandError::Usage(e.to_string())
            })?,
        };
        let argmax = spectrum
            .argmax_channel()
            .filter(|_| !spectrum.empty)
            .map(|p| p.frequency_hz);
        let argmax_matches =
            t.verdict == Verdict::Delivered && argmax.is_some_and(|a| grid.index_of(a) == grid.index_of(f));
        runs.push(SpectrumRun {
            commanded_hz: f,
            attempts: attempt + 1,
            seed,
            verdict: t.verdict,
            stream_len: t.stream.len(),
            argmax_hz: argmax,
            snr: t.snr.first().copied(),
            empty: spectrum.empty,
            argmax_matches,
            file: spectrum_file_name(f),
        });
        spectra.push(spectrum);
    }

    let dir = cfg.output.dir.clone();
    prepare_out(&dir)?;
    let mut files = Vec::new();
    for (run, spectrum) in runs.iter().zip(&spectra) {
        let path = dir.join(&run.file);
        spectrum.write_csv(create(&path)?).map_err(|e| io_err(&path, e))?;
        files.push(path);
    }
    let combined = dir.join("spectrum_all.csv");
    write_csv(
        create(&combined)?,
        &["commanded_hz", "frequency_hz", "magnitude"],
        runs.iter().zip(&spectra).flat_map(|(run, s)| {
            s.points().iter().map(move |p| {
                vec![sig9(run.commanded_hz), sig9(p.frequency_hz), sig9(p.magnitude)]
            })
        }),
    )
    .map_err(|e| io_err(&combined, e))?;
    files.push(combined);

    let summary = SpectrumSummary {
        all_matched: runs.iter().all(|r| r.argmax_matches),
        runs,
    };
    let summary_path = dir.join("spectrum_summary.json");
    write_json(&summary_path, &summary)?;
    files.push(summary_path);

    for r in &summary.runs {
        let _ = writeln!(
            log,
            "{} Hz: argmax {} Hz, snr {}, {} records, {:?}{}",
            sig9(r.commanded_hz),
            r.argmax_hz.map_or("-".into(), sig9),
            r.snr.map_or("-".into(), sig9),
            r.stream_len,
            r.verdict,
            if r.empty { " (empty spectrum)" } else { "" }
        );
    }
    let exit_code = if summary.all_matched {
        exit::SUCCESS
    } else if summary
        .runs
        .iter()
        .any(|r| matches!(r.verdict, Verdict::AbortedForward | Verdict::AbortedBackward))
    {
        exit::PROTOCOL_ABORT
    } else {
        exit::DECODE_FAILURE
    };
    Ok(Outcome { exit_code, files })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct SecureDistance {
    #[serde(serialize_with = "crate::output::serde_sig9::serialize")]
    mu: f64,
    /// `None` when no swept distance is secure.
    #[serde(serialize_with = "crate::output::serde_sig9::option")]
    secure_distance_km: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct SecuritySummary {
    bits: u32,
    block_photons: usize,
    #[serde(serialize_with = "crate::output::serde_sig9::serialize")]
    required_ratio: f64,
    secure_distances: Vec<SecureDistance>,
}

pub fn cmd_security(args: &SecurityArgs, log: &mut dyn Write) -> Result<Outcome, CommandError> {
    let mut cfg = load(&args.common)?;
    apply_channel(&mut cfg, &args.channel);
    let s = &mut cfg.security;
    if let Some(v) = &args.mu_list {
        s.mu_list = v.clone();
    }
    if let Some(v) = &args.l1_grid_km {
        s.l1_grid_km = v.clone();
    }
    if let Some(v) = args.block_photons {
        s.block_photons = v;
    }
    if let Some(v) = args.bits {
        s.bits = Some(v);
    }
    cfg.validate()?;

    let coding = cfg.coding();
    let sweep = security_sweep(
        &cfg.channel,
        &cfg.security.mu_list,
        &cfg.security.l1_grid_km,
        &coding,
    );
    let dir = cfg.output.dir.clone();
    prepare_out(&dir)?;
    let csv_path = dir.join("security.csv");
    sweep.write_csv(create(&csv_path)?).map_err(|e| io_err(&csv_path, e))?;

    let summary = SecuritySummary {
        bits: coding.bits,
        block_photons: coding.block_photons,
        required_ratio: coding.required_ratio(),
        secure_distances: sweep
            .mus()
            .into_iter()
            .map(|mu| SecureDistance {
                mu,
                secure_distance_km: sweep.secure_distance(mu),
            })
            .collect(),
    };
    let summary_path = dir.join("security_summary.json");
    write_json(&summary_path, &summary)?;

    let _ = writeln!(log, "required ratio N/b = {}", sig9(summary.required_ratio));
    for d in &summary.secure_distances {
        let _ = writeln!(
            log,
            "mu {}: secure up to {}",
            sig9(d.mu),
            d.secure_distance_km
                .map_or("no swept distance".to_string(), |km| format!("{} km", sig9(km)))
        );
    }
    Ok(Outcome {
        exit_code: exit::SUCCESS,
        files: vec![csv_path, summary_path],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacitySummary {
    pub channels: usize,
    pub tones: usize,
    /// `N_max`, exact; serialized as a decimal string to survive JSON readers.
    pub combinations: String,
    pub bits: u32,
    #[serde(serialize_with = "crate::output::serde_sig9::serialize")]
    pub log2_combinations: f64,
    #[serde(serialize_with = "crate::output::serde_sig9::serialize")]
    pub t_span_s: f64,
    #[serde(serialize_with = "crate::output::serde_sig9::serialize")]
    pub rate_bps: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// The widely quoted wideband example (333,334 channels, three tones, 1 ms)
/// is sometimes given as 42.5 kbps; the formula gives about 52.4 kbps.
fn wideband_note(c: &Capacity, t_span_s: f64) -> Option<String> {
    let wideband = (333_333..=333_334).contains(&c.channels)
        && c.tones == 3
        && (t_span_s - 1e-3).abs() < 1e-12;
    wideband.then(|| {
        "a rate of 42.5 kbps is often quoted for this configuration; \
         log2(C(N_c, 3)) / T_span evaluates to the value above"
            .to_string()
    })
}

pub fn capacity_summary(capacity: &Capacity, t_span_s: f64) -> CapacitySummary {
    CapacitySummary {
        channels: capacity.channels,
        tones: capacity.tones,
        combinations: capacity.combinations.to_string(),
        bits: capacity.bits,
        log2_combinations: capacity.log2_combinations,
        t_span_s,
        rate_bps: transmission_rate_log2(capacity.log2_combinations, t_span_s),
        note: wideband_note(capacity, t_span_s),
    }
}

pub fn cmd_capacity(args: &CapacityArgs, log: &mut dyn Write) -> Result<Outcome, CommandError> {
    let cfg = load(&args.common)?;
    let channels = match args.channels {
        Some(0) => return Err(CommandError::Usage("--channels must be at least 1".into())),
        Some(n) => n,
        None => {
            let base = cfg.protocol.grid;
            let grid = FrequencyGrid {
                f_min_hz: args.f_min_hz.unwrap_or(base.f_min_hz),
                f_max_hz: args.f_max_hz.unwrap_or(base.f_max_hz),
                f_b_hz: args.f_b_hz.unwrap_or(base.f_b_hz),
            };
            grid.channel_count()
                .map_err(|e| CommandError::Usage(e.to_string()))?
        }
    };
    let tones = args.tones.unwrap_or(cfg.protocol.tones);
    let t_span_s = args.t_span_s.unwrap_or(cfg.protocol.t_span_s);
    if !(t_span_s > 0.0 && t_span_s.is_finite()) {
        return Err(CommandError::Usage("--t-span-s must be positive".into()));
    }
    let capacity =
        combinatorial_capacity(channels, tones).map_err(|e| CommandError::Usage(e.to_string()))?;
    let summary = capacity_summary(&capacity, t_span_s);

    let _ = writeln!(log, "N_c = {}", summary.channels);
    let _ = writeln!(log, "N_max = {}", summary.combinations);
    let _ = writeln!(log, "b = {}", summary.bits);
    let _ = writeln!(log, "I = {} bps", sig9(summary.rate_bps));
    if let Some(note) = &summary.note {
        let _ = writeln!(log, "note: {note}");
    }
    let json = serde_json::to_string_pretty(&summary).expect("summary serialises");
    let _ = writeln!(log, "{json}");

    let mut files = Vec::new();
    if args.common.out.is_some() || args.common.config.is_some() {
        let dir = cfg.output.dir.clone();
        prepare_out(&dir)?;
        let path = dir.join("capacity.json");
        write_json(&path, &summary)?;
        files.push(path);
    }
    Ok(Outcome {
        exit_code: exit::SUCCESS,
        files,
    })
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Progress goes to `out`, diagnostics to `err`.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::CONFIG } else { exit::SUCCESS };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Simulate(a) => cmd_simulate(a, out),
        Command::Spectrum(a) => cmd_spectrum(a, out),
        Command::Security(a) => cmd_security(a, out),
        Command::Capacity(a) => cmd_capacity(a, out),
    };
    match result {
        Ok(outcome) => outcome.exit_code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
