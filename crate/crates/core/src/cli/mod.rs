//! The `sdtransit` command line.
//!
//! Exit codes: 0 success, 1 internal error, 2 invalid data, 3 I/O error,
//! 4 invalid configuration or usage. Log level comes from `SDTRANSIT_LOG`
//! (`error`, `warn`, `info`, `debug`, `trace`; default `warn`).

mod commands;
pub mod config;

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::ingest::Format;
use crate::metrics::FrameRange;

pub const EXIT_OK: u8 = 0;
pub const EXIT_INTERNAL: u8 = 1;
pub const EXIT_DATA: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_CONFIG: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Internal(String),
    #[error("{0}")]
    Data(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Config(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }

    /// Same kind (and exit code), different message.
    pub fn with_message(self, message: String) -> Self {
        match self {
            CliError::Internal(_) => CliError::Internal(message),
            CliError::Data(_) => CliError::Data(message),
            CliError::Io { source, .. } => CliError::Io { path: message, source },
            CliError::Config(_) => CliError::Config(message),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Internal(_) => EXIT_INTERNAL,
            CliError::Data(_) => EXIT_DATA,
            CliError::Io { .. } => EXIT_IO,
            CliError::Config(_) => EXIT_CONFIG,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "sdtransit", version, about = "Passenger detection post-processing for onboard transit CCTV")]
pub struct Cli {
    /// TOML file with default thresholds; flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check detection files and print a summary.
    Validate(ValidateArgs),
    /// Drop detections whose tracks are too short-lived.
    Filter(FilterArgs),
    /// Grade social distancing per frame.
    Assess(AssessArgs),
    /// Score headcounts against ground truth.
    Evaluate(EvaluateArgs),
    /// Generate a synthetic scenario.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct SelectionArgs {
    /// Keep only detections with this label [default: person].
    #[arg(long)]
    pub label: Option<String>,
    /// Drop detections scoring below this [default: 0.5].
    #[arg(long, value_name = "SCORE")]
    pub score_threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Detection files (`-` for stdin).
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Input format; inferred from the extension when omitted.
    #[arg(long)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    /// Detection file (`-` for stdin).
    pub input: PathBuf,
    /// Filtered detections (`-` for stdout).
    #[arg(short, long)]
    pub output: PathBuf,
    /// Where to write the JSON filter report.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub format: Option<Format>,
    /// Per-axis centroid tolerance in pixels [default: 10].
    #[arg(long, value_name = "PX")]
    pub tolerance_px: Option<f64>,
    /// Appearances needed to keep a track [default: 40].
    #[arg(long, value_name = "FRAMES")]
    pub min_frames: Option<u32>,
    /// Frames a track may go unseen before it closes [default: 8].
    #[arg(long, value_name = "FRAMES")]
    pub gap_frames: Option<u32>,
    /// Accept --min-frames outside 4..=300.
    #[arg(long)]
    pub allow_out_of_range: bool,
    #[command(flatten)]
    pub selection: SelectionArgs,
}

#[derive(Debug, Args)]
pub struct AssessArgs {
    /// Detection file (`-` for stdin).
    pub input: PathBuf,
    /// Per-frame assessment NDJSON (`-` for stdout).
    #[arg(short, long)]
    pub output: PathBuf,
    /// Write one SVG per assessed frame here.
    #[arg(long)]
    pub overlay_dir: Option<PathBuf>,
    #[arg(long)]
    pub format: Option<Format>,
    /// Nearest-neighbour distance below which a passenger is red [default: 60].
    #[arg(long, value_name = "PX")]
    pub danger_px: Option<f64>,
    /// Nearest-neighbour distance below which a passenger is amber [default: 120].
    #[arg(long, value_name = "PX")]
    pub warn_px: Option<f64>,
    /// DBSCAN radius [default: the warn distance].
    #[arg(long, value_name = "PX")]
    pub eps: Option<f64>,
    /// DBSCAN core-point size, including the point itself [default: 2].
    #[arg(long)]
    pub min_pts: Option<usize>,
    /// Overlay canvas width [default: 704].
    #[arg(long, value_name = "PX")]
    pub frame_width: Option<f64>,
    /// Overlay canvas height [default: 576].
    #[arg(long, value_name = "PX")]
    pub frame_height: Option<f64>,
    #[command(flatten)]
    pub selection: SelectionArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportFormat {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Headcount CSV (`frame,ground_truth[,predicted]`).
    #[arg(long, value_name = "PATH")]
    pub ground_truth: PathBuf,
    /// Detection stream to count; without it the `predicted` column is used.
    #[arg(long, value_name = "PATH")]
    pub predictions: Option<PathBuf>,
    /// Filtered stream to compare against --predictions.
    #[arg(long, value_name = "PATH", requires = "predictions")]
    pub after: Option<PathBuf>,
    /// Restrict to frames START..END (end exclusive).
    #[arg(long, value_name = "START..END")]
    pub frames: Option<FrameRange>,
    /// Report destination [default: stdout].
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub report_format: ReportFormat,
    #[arg(long)]
    pub format: Option<Format>,
    #[command(flatten)]
    pub selection: SelectionArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Built-in scenario name.
    #[arg(long, conflicts_with = "scenario", required_unless_present_any = ["scenario", "list"])]
    pub preset: Option<String>,
    /// Scenario TOML file.
    #[arg(long, value_name = "PATH")]
    pub scenario: Option<PathBuf>,
    /// Override the scenario seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory for the generated files.
    #[arg(long, required_unless_present = "list")]
    pub out_dir: Option<PathBuf>,
    /// Format of the generated streams.
    #[arg(long, default_value = "ndjson")]
    pub format: Format,
    /// Print the preset names and exit.
    #[arg(long)]
    pub list: bool,
}

fn is_std(path: &Path) -> bool {
    path.as_os_str() == "-"
}

pub(crate) fn read_input(path: &Path) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    if is_std(path) {
        std::io::stdin().read_to_end(&mut buf).map_err(|e| CliError::io(path, e))?;
    } else {
        buf = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    }
    Ok(buf)
}

/// Writes via a temporary file in the target directory and renames it into place.
pub(crate) fn write_output(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if is_std(path) {
        let mut out = std::io::stdout().lock();
        return out.write_all(bytes).and_then(|_| out.flush()).map_err(|e| CliError::io(path, e));
    }
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub(crate) fn format_for(path: &Path, explicit: Option<Format>) -> Format {
    explicit.unwrap_or_else(|| Format::from_path(path))
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or("SDTRANSIT_LOG", "warn");
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match run(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let file = config::ConfigFile::load(cli.config.as_deref())?;
    match cli.command {
        Command::Validate(args) => commands::validate(&args),
        Command::Filter(args) => commands::filter(&args, &file),
        Command::Assess(args) => commands::assess(&args, &file),
        Command::Evaluate(args) => commands::evaluate(&args, &file),
        Command::Simulate(args) => commands::simulate(&args),
    }
}

pub fn main() -> ExitCode {
    ExitCode::from(run_from(std::env::args_os()))
}
