//! Command-line front end: one subcommand per figure-style data set, each
//! writing CSV/JSON/SVG artifacts plus a `manifest.json` with the resolved
//! configuration and SHA-256 checksums into the output directory.

pub mod commands;
pub mod grid;
pub mod svg;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use dualres_core::device::DeviceParams;
use dualres_core::Error;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub use commands::{geff_table, GeffRow};

#[derive(Parser, Debug, Clone)]
#[command(
    name = "dualres",
    version,
    about = "Double-resonator coupler simulator"
)]
pub struct Cli {
    /// Device JSON; missing keys take the built-in measured-device values.
    #[arg(long, global = true)]
    pub device: Option<PathBuf>,

    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Dressed levels versus a flux or frequency sweep of one qubit.
    Spectrum(SpectrumArgs),
    /// Perturbative coupling versus co-tuned frequency, with its zero and an
    /// exact-diagonalization overlay.
    Geff(GeffArgs),
    /// Qubit-qubit gap at several qubit-2 setpoints.
    Gapscan(GapscanArgs),
    /// Vacuum-Rabi chevron and the time-domain coupling estimate.
    Chevron(ChevronArgs),
    /// Fit a decay or damped oscillation to a CSV trace.
    Fit(FitArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SpectrumArgs {
    /// flux_1, flux_2, freq_1 or freq_2.
    #[arg(long, default_value = "flux_1")]
    pub axis: String,
    /// Sweep grid in control units (flux) or GHz (freq).
    #[arg(long, default_value = "0:0.3:601", allow_hyphen_values = true)]
    pub sweep: String,
    /// Frequency of the other qubit, GHz. Defaults to its sweet spot.
    #[arg(long)]
    pub other: Option<f64>,
    #[arg(long, default_value = "3,3,3,3")]
    pub dims: String,
    /// Excited levels written and plotted.
    #[arg(long, default_value_t = 8)]
    pub levels: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GeffArgs {
    /// Co-tuned qubit frequencies, GHz.
    #[arg(long, default_value = "4.52:4.76:50", allow_hyphen_values = true)]
    pub range: String,
    /// Root bracket `lo:hi` in GHz; defaults to the inner 80% of the
    /// resonator interval.
    #[arg(long, allow_hyphen_values = true)]
    pub search: Option<String>,
    #[arg(long, default_value = "3,3,3,3")]
    pub dims: String,
    /// Skip the exact-diagonalization overlay.
    #[arg(long)]
    pub no_ed: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GapscanArgs {
    /// Qubit-2 setpoints, GHz.
    #[arg(
        long,
        default_value = "4.58,4.60,4.62,4.64,4.66,4.68",
        allow_hyphen_values = true
    )]
    pub setpoints: String,
    /// Half width of the qubit-1 scan, MHz.
    #[arg(long, default_value_t = dualres_core::spectroscopy::DEFAULT_GAP_HALF_WIDTH_MHZ)]
    pub half_width: f64,
    #[arg(long, default_value_t = dualres_core::spectroscopy::DEFAULT_GAP_POINTS)]
    pub points: usize,
    #[arg(long, default_value = "3,3,3,3")]
    pub dims: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameArg {
    Bare,
    Dressed,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ChevronArgs {
    /// Qubit-2 interaction frequency, GHz.
    #[arg(long, default_value_t = 4.58)]
    pub q2: f64,
    /// Qubit-1 offsets from qubit 2, MHz.
    #[arg(long, default_value = "-20:20:41", allow_hyphen_values = true)]
    pub offsets: String,
    /// Interaction times, ns.
    #[arg(long, default_value = "0:2000:201", allow_hyphen_values = true)]
    pub taus: String,
    /// Idle point `f1,f2` in GHz.
    #[arg(long, default_value = "4.637,4.691", allow_hyphen_values = true)]
    pub bias: String,
    #[arg(long, value_enum, default_value_t = FrameArg::Bare)]
    pub frame: FrameArg,
    #[arg(long, default_value = "2,2,2,2")]
    pub dims: String,
    /// Fixed prep-to-readout interval, ns.
    #[arg(long)]
    pub fixed_interval: Option<f64>,
    /// RK4 step override, ns.
    #[arg(long)]
    pub max_step: Option<f64>,
    /// Adds a `scale,baseline` readout-contrast column.
    #[arg(long, allow_hyphen_values = true)]
    pub contrast: Option<String>,
    /// Gaussian readout noise (absolute σ on p1); needs --seed.
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelArg {
    Exp,
    Cosine,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct FitArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    /// CSV with time_ns, value[, sigma].
    #[arg(long)]
    pub trace: PathBuf,
}

/// Process exit code for a failure: 2 for bad input, 3 when the physics has
/// no answer, 4 when a numerical method missed its accuracy contract.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_)
        | Error::DimensionCap { .. }
        | Error::Io(_)
        | Error::Json(_)
        | Error::Csv(_) => 2,
        Error::Domain(_)
        | Error::OscillationNotDetected(_)
        | Error::BelowSensitivityFloor { .. } => 3,
        Error::Numerical(_) | Error::NotHermitian { .. } => 4,
    }
}

/// One named output file.
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn new(name: &str, bytes: impl Into<Vec<u8>>) -> Self {
        Self {
            name: name.to_string(),
            bytes: bytes.into(),
        }
    }

    pub fn json(name: &str, value: &serde_json::Value) -> Result<Self, Error> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        Ok(Self::new(name, bytes))
    }
}

/// What a command produced; `error` is returned after the artifacts are
/// written so partial results survive a failing stage.
pub struct Outcome {
    pub resolved: serde_json::Value,
    pub artifacts: Vec<Artifact>,
    pub error: Option<Error>,
}

pub fn load_device(path: Option<&Path>) -> Result<DeviceParams, Error> {
    let params = match path {
        Some(p) => DeviceParams::from_json_file(p)?,
        None => DeviceParams::default(),
    };
    params.validate()?;
    Ok(params)
}

/// Runs the parsed command and writes its artifacts and manifest. Returns the
/// written paths, manifest last.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>, Error> {
    let params = load_device(cli.device.as_deref())?;
    let (name, outcome) = match &cli.command {
        Command::Spectrum(a) => ("spectrum", commands::spectrum(&params, a)?),
        Command::Geff(a) => ("geff", commands::geff(&params, a)?),
        Command::Gapscan(a) => ("gapscan", commands::gapscan(&params, a)?),
        Command::Chevron(a) => ("chevron", commands::chevron(&params, a)?),
        Command::Fit(a) => ("fit", commands::fit(a)?),
    };
    let written = write_outputs(cli, name, &params, &outcome)?;
    match outcome.error {
        Some(e) => Err(e),
        None => Ok(written),
    }
}

fn write_outputs(
    cli: &Cli,
    name: &str,
    params: &DeviceParams,
    outcome: &Outcome,
) -> Result<Vec<PathBuf>, Error> {
    std::fs::create_dir_all(&cli.out)?;
    let mut written = Vec::new();
    let mut checksums = serde_json::Map::new();
    for a in &outcome.artifacts {
        let path = cli.out.join(&a.name);
        std::fs::write(&path, &a.bytes)?;
        checksums.insert(
            a.name.clone(),
            serde_json::json!({
                "sha256": hex::encode(Sha256::digest(&a.bytes)),
                "bytes": a.bytes.len(),
            }),
        );
        written.push(path);
    }
    let manifest = serde_json::json!({
        "tool": "dualres",
        "version": env!("CARGO_PKG_VERSION"),
        "command": name,
        "device_file": cli.device.as_ref().map(|p| p.display().to_string()),
        "device": params,
        "config": outcome.resolved,
        "status": match &outcome.error {
            None => serde_json::json!("ok"),
            Some(e) => serde_json::json!({ "error": e.to_string(), "exit_code": exit_code(e) }),
        },
        "artifacts": checksums,
    });
    let m = Artifact::json("manifest.json", &manifest)?;
    let path = cli.out.join(&m.name);
    std::fs::write(&path, &m.bytes)?;
    written.push(path);
    Ok(written)
}
