//! `vibsim`: Franck-Condon spectra and trapped-ion emulation from a
//! molecular parameter file.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vibsim_core::spectrum::WidthKind;
use vibsim_core::{Error, ErrorKind};

#[derive(Debug, Parser)]
#[command(name = "vibsim", version, about = "Vibronic spectra via Gaussian boson operations on a truncated Fock space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the Doktorov operator parameters for a molecule.
    Decompose(DecomposeArgs),
    /// Compute the stick spectrum and its broadened curve.
    Spectrum(SpectrumArgs),
    /// Emulate finite-shot projection measurements with readout correction.
    Emulate(EmulateArgs),
    /// Map the operator sequence to laser pulses.
    PulsePlan(PulsePlanArgs),
}

#[derive(Debug, Clone, Args)]
struct InputArgs {
    /// Molecular parameter file (TOML).
    input: PathBuf,

    /// Squeezing rescale constant; defaults to the file's `scale`, else 25.
    #[arg(long)]
    scale: Option<f64>,

    /// Output directory.
    #[arg(long, env = "VIBSIM_OUT_DIR", default_value = "vibsim-out")]
    out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
struct CutoffArgs {
    /// Fixed cutoff for every mode (disables the automatic search).
    #[arg(long, conflicts_with = "cutoffs")]
    cutoff: Option<usize>,

    /// Fixed per-mode cutoffs, comma separated.
    #[arg(long, value_delimiter = ',')]
    cutoffs: Option<Vec<usize>>,

    /// Largest cutoff tried by the automatic search.
    #[arg(long, default_value_t = vibsim_core::fock::AUTO_CUTOFF_CAP)]
    cutoff_cap: usize,

    /// Leakage the automatic search must reach.
    #[arg(long, default_value_t = vibsim_core::fock::AUTO_LEAKAGE_TARGET)]
    leakage_target: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum WidthKindArg {
    Fwhm,
    Stddev,
}

impl From<WidthKindArg> for WidthKind {
    fn from(w: WidthKindArg) -> Self {
        match w {
            WidthKindArg::Fwhm => WidthKind::Fwhm,
            WidthKindArg::Stddev => WidthKind::Stddev,
        }
    }
}

#[derive(Debug, Clone, Args)]
struct BroadenArgs {
    /// Gaussian width, cm^-1.
    #[arg(long, default_value_t = 50.0)]
    width: f64,

    #[arg(long, value_enum, default_value_t = WidthKindArg::Fwhm)]
    width_kind: WidthKindArg,

    /// Grid spacing of the broadened curve, cm^-1.
    #[arg(long, default_value_t = 1.0)]
    grid_step: f64,

    /// Merge sticks closer than this, cm^-1.
    #[arg(long, default_value_t = vibsim_core::spectrum::DEFAULT_MERGE_TOL)]
    merge_tol: f64,
}

#[derive(Debug, Clone, Args)]
struct DeviceArgs {
    #[arg(long)]
    rate_displacement: Option<f64>,
    #[arg(long)]
    rate_squeeze: Option<f64>,
    #[arg(long)]
    rate_rotation: Option<f64>,
    /// MHz
    #[arg(long)]
    trap_freq_x: Option<f64>,
    /// MHz
    #[arg(long)]
    trap_freq_y: Option<f64>,
    #[arg(long)]
    lamb_dicke_x: Option<f64>,
    #[arg(long)]
    lamb_dicke_y: Option<f64>,
}

#[derive(Debug, Clone, Args)]
struct MeasureArgs {
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    eta_up: Option<f64>,
    #[arg(long)]
    eta_down: Option<f64>,
    /// Measure Fock indices whose ideal probability exceeds this.
    #[arg(long)]
    target_threshold: Option<f64>,
    /// Table of transfer fidelities F_D.M keyed by `nX nY`.
    #[arg(long, conflicts_with = "f_pi")]
    fdm_table: Option<PathBuf>,
    /// Synthetic F_D.M = f_pi^(nX + nY + 2).
    #[arg(long)]
    f_pi: Option<f64>,
}

#[derive(Debug, Clone, Args)]
struct DecomposeArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Print JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Emit {
    Sticks,
    Curve,
    RawVsCorrected,
    PulsePlan,
}

#[derive(Debug, Clone, Args)]
struct SpectrumArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    cutoff: CutoffArgs,
    #[command(flatten)]
    broaden: BroadenArgs,
    /// Outputs to write (metadata is always written).
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Emit::Sticks, Emit::Curve])]
    emit: Vec<Emit>,
}

#[derive(Debug, Clone, Args)]
struct EmulateArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    cutoff: CutoffArgs,
    #[command(flatten)]
    broaden: BroadenArgs,
    #[command(flatten)]
    measure: MeasureArgs,
    #[command(flatten)]
    device: DeviceArgs,
    /// Outputs to write (records table and metadata are always written).
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_values_t = [Emit::Sticks, Emit::Curve, Emit::RawVsCorrected]
    )]
    emit: Vec<Emit>,
}

#[derive(Debug, Clone, Args)]
struct PulsePlanArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    device: DeviceArgs,
    /// Keep zero-duration pulses in the table.
    #[arg(long)]
    include_zero: bool,
}

fn exit_code(e: &Error) -> u8 {
    match e.kind() {
        ErrorKind::Input => 2,
        ErrorKind::Numeric => 3,
        ErrorKind::Model => 4,
        ErrorKind::Io => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Decompose(a) => commands::decompose(&a),
        Command::Spectrum(a) => commands::spectrum(&a),
        Command::Emulate(a) => commands::emulate(&a),
        Command::PulsePlan(a) => commands::pulse_plan(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
