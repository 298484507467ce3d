//! `strokelab` command-line front end.
//!
//! Every subcommand reads its inputs, writes its outputs atomically and
//! prints one summary line. Exit codes: 0 success, 1 domain error, 2 usage
//! or input-format error.

mod commands;
mod config;
mod io;

use std::ffi::OsString;
use std::path::PathBuf;
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use strokelab_core::classifiers::{ClassifierError, NnError};
use strokelab_core::homography::HomographyError;
use strokelab_core::recognition::{PadMode, RecognitionError};
use strokelab_core::segment::SegmentError;
use strokelab_core::synth::SynthError;
use strokelab_core::tracker::{Convention, TrackerEvalError};
use strokelab_core::trajectory::TrajectoryError;
use thiserror::Error;

pub use commands::train::{DEFAULT_BATCH, DEFAULT_EPOCHS, DEFAULT_LR};
pub use config::ConfigFile;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Format(String),
    #[error("{0}")]
    Domain(String),
    #[error("write failed: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Domain(_) | Self::Io(_) => 1,
            Self::Usage(_) | Self::Format(_) => 2,
        }
    }
}

impl From<TrajectoryError> for CliError {
    fn from(e: TrajectoryError) -> Self {
        match e {
            TrajectoryError::InsufficientData(_) => Self::Domain(e.to_string()),
            TrajectoryError::InvalidParameters(_) => Self::Usage(e.to_string()),
            _ => Self::Format(e.to_string()),
        }
    }
}

impl From<SegmentError> for CliError {
    fn from(e: SegmentError) -> Self {
        match e {
            SegmentError::InvalidConfig(_) => Self::Usage(e.to_string()),
            _ => Self::Domain(e.to_string()),
        }
    }
}

impl From<RecognitionError> for CliError {
    fn from(e: RecognitionError) -> Self {
        match e {
            RecognitionError::Parse { .. } | RecognitionError::BadShape { .. } => Self::Format(e.to_string()),
            _ => Self::Domain(e.to_string()),
        }
    }
}

impl From<ClassifierError> for CliError {
    fn from(e: ClassifierError) -> Self {
        match e {
            ClassifierError::ModelFile(_) | ClassifierError::Nn(NnError::Schema(_)) => Self::Format(e.to_string()),
            ClassifierError::InvalidConfig(_) | ClassifierError::InvalidK { .. } => Self::Usage(e.to_string()),
            _ => Self::Domain(e.to_string()),
        }
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        match e {
            SynthError::InvalidPlan(_) | SynthError::InvalidDegrade(_) | SynthError::InvalidParams(_) => {
                Self::Usage(e.to_string())
            }
            SynthError::Trajectory(t) => t.into(),
            _ => Self::Domain(e.to_string()),
        }
    }
}

impl From<TrackerEvalError> for CliError {
    fn from(e: TrackerEvalError) -> Self {
        match e {
            TrackerEvalError::BadThreshold(_) => Self::Usage(e.to_string()),
            _ => Self::Domain(e.to_string()),
        }
    }
}

impl From<HomographyError> for CliError {
    fn from(e: HomographyError) -> Self {
        Self::Domain(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Arch {
    Tcn,
    Fcnn,
    Knn,
}

impl FromStr for Arch {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tcn" => Ok(Self::Tcn),
            "fcnn" => Ok(Self::Fcnn),
            "knn" => Ok(Self::Knn),
            other => Err(format!("unknown architecture `{other}` (expected tcn|fcnn|knn)")),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "strokelab", version, about = "Table-tennis ball trajectory toolkit")]
struct Cli {
    /// key=value file with defaults for any flag (flags take precedence)
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic rally (CSV + annotation) or a labelled dataset
    Synth(SynthArgs),
    /// Detect strokes, pitches and outcomes in a trajectory
    Segment(SegmentArgs),
    /// Turn annotated strokes into a classifier dataset (JSONL)
    Prepare(PrepareArgs),
    /// Train a classifier with both padding modes and report accuracies
    Train(TrainArgs),
    /// Predict stroke labels for a dataset
    Classify(ClassifyArgs),
    /// Score a tracker's output against ground truth
    EvalTracker(EvalTrackerArgs),
    /// Accuracy and confusion matrix of a model on a labelled dataset
    EvalModel(EvalModelArgs),
    /// Merge JSON reports into one document
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Output path: trajectory CSV, or dataset JSONL with --dataset
    #[arg(long)]
    out: PathBuf,
    /// Ground-truth annotation JSON
    #[arg(long)]
    ann: Option<PathBuf>,
    /// Rally plan, e.g. "serve,valid*5,missed_net" or "serve:topspin,valid:push"
    #[arg(long)]
    rally: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Per-frame probability of losing the ball
    #[arg(long)]
    dropout: Option<f64>,
    /// Gaussian pixel jitter sigma
    #[arg(long)]
    jitter: Option<f64>,
    /// Number of labelled standalone strokes to generate instead of a rally
    #[arg(long)]
    dataset: Option<usize>,
    #[arg(long)]
    pad: Option<PadMode>,
}

#[derive(Debug, Args)]
struct SegmentArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long = "net-x", value_name = "PX")]
    net_x: Option<f64>,
    /// JSON file with four pixel/table correspondences
    #[arg(long)]
    homography: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PrepareArgs {
    /// Trajectory CSV (repeatable, paired with --ann in order)
    #[arg(long, required = true)]
    input: Vec<PathBuf>,
    /// Stroke annotation JSON (repeatable)
    #[arg(long, required = true)]
    ann: Vec<PathBuf>,
    #[arg(long)]
    pad: Option<PadMode>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Labelled dataset JSONL, split 85/15 into train and validation
    #[arg(long)]
    input: PathBuf,
    /// Optional held-out labelled dataset
    #[arg(long)]
    test: Option<PathBuf>,
    #[arg(long)]
    arch: Option<Arch>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Neighbours for knn
    #[arg(long)]
    k: Option<usize>,
    /// Padding mode of the saved model
    #[arg(long)]
    pad: Option<PadMode>,
    /// Output model file
    #[arg(long)]
    model: PathBuf,
    /// Output padding-comparison report
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EvalTrackerArgs {
    #[arg(long)]
    gt: PathBuf,
    #[arg(long)]
    pred: PathBuf,
    #[arg(long, value_name = "PX")]
    threshold: Option<f64>,
    #[arg(long)]
    mislocalized: Option<Convention>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalModelArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// JSON report (repeatable)
    #[arg(long, required = true)]
    input: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

/// Runs one command line (including the program name) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    match execute(cli) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<String, CliError> {
    let cfg = ConfigFile::load(cli.config.as_deref())?;
    match cli.command {
        Command::Synth(a) => commands::synth::run(a, &cfg),
        Command::Segment(a) => commands::segment::run(a, &cfg),
        Command::Prepare(a) => commands::prepare::run(a, &cfg),
        Command::Train(a) => commands::train::run(a, &cfg),
        Command::Classify(a) => commands::models::classify(a),
        Command::EvalModel(a) => commands::models::eval_model(a),
        Command::EvalTracker(a) => commands::tracker::run(a, &cfg),
        Command::Report(a) => commands::report::run(a),
    }
}
