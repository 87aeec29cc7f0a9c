mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gsd::{CsvFormat, Model};

/// Fit and test generalized score distributions on rating-scale data.
#[derive(Debug, Parser)]
#[command(name = "gsd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit one model to every sample of a score file (JSON lines).
    Fit(FitArgs),
    /// Print the probability of each category.
    Pmf(PmfArgs),
    /// Draw samples and write them as a score file.
    Sample(SampleArgs),
    /// Pearson χ² test of each sample against a fitted or given model.
    Gof(GofArgs),
    /// Fit and test every model on every sample, with global tests.
    Batch(BatchArgs),
    /// Run an estimator-accuracy simulation study.
    Simstudy(SimstudyArgs),
    /// Discretization curves of the rounded Normal model (CSV).
    Curves(CurvesArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Long,
    Wide,
}

impl From<FormatArg> for CsvFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Long => CsvFormat::Long,
            FormatArg::Wide => CsvFormat::Wide,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    Gsd,
    Qnormal,
    Normal,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Gsd => Model::Gsd,
            ModelArg::Qnormal => Model::QNormal,
            ModelArg::Normal => Model::Normal,
        }
    }
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Score file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "long")]
    format: FormatArg,
    /// Number of categories on the scale.
    #[arg(long = "M", default_value_t = gsd::DEFAULT_SCALE)]
    m: u32,
}

#[derive(Debug, Args)]
struct FitTuning {
    /// Coarse-grid restarts besides the moment estimate.
    #[arg(long)]
    restarts: Option<usize>,
    /// Gradient-norm tolerance of the optimizer.
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value = "gsd")]
    model: ModelArg,
    #[command(flatten)]
    tuning: FitTuning,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PmfArgs {
    #[arg(long, value_enum, default_value = "gsd")]
    model: ModelArg,
    /// Mean (GSD) or Normal location.
    #[arg(long, allow_negative_numbers = true)]
    psi: f64,
    /// Confidence parameter (GSD).
    #[arg(long)]
    rho: Option<f64>,
    /// Normal standard deviation (qnormal, normal).
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long = "M", default_value_t = gsd::DEFAULT_SCALE)]
    m: u32,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[arg(long, value_enum, default_value = "gsd")]
    model: ModelArg,
    #[arg(long, allow_negative_numbers = true)]
    psi: f64,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    /// Answers per sample.
    #[arg(long)]
    n: usize,
    /// Number of samples.
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "M", default_value_t = gsd::DEFAULT_SCALE)]
    m: u32,
    #[arg(long, value_enum, default_value = "long")]
    format: FormatArg,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GofArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value = "gsd")]
    model: ModelArg,
    /// Test against this GSD instead of a fitted one (needs --rho).
    #[arg(long)]
    psi: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long, default_value_t = gsd::gof::DEFAULT_ALPHA)]
    alpha: f64,
    /// Smallest expected count per cell after merging.
    #[arg(long, default_value_t = gsd::gof::DEFAULT_MIN_EXPECTED)]
    min_expected: f64,
    #[command(flatten)]
    tuning: FitTuning,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BatchArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = gsd::gof::DEFAULT_ALPHA)]
    alpha: f64,
    #[arg(long, default_value_t = gsd::gof::DEFAULT_MIN_EXPECTED)]
    min_expected: f64,
    /// Recorded in the report.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    tuning: FitTuning,
    /// JSON report (stdout when absent).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Per-sample rows as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimstudyArgs {
    /// TOML design; an optional [fit] table sets optimizer options.
    #[arg(long)]
    design: Option<PathBuf>,
    /// Overrides the design seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Records CSV (stdout when absent).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Accuracy summary as JSON.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Signed errors per record as CSV.
    #[arg(long)]
    errors: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CurvesArgs {
    /// Normal standard deviations, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    sigma: Vec<f64>,
    #[arg(long = "M", default_value_t = gsd::DEFAULT_SCALE)]
    m: u32,
    /// Grid points over [1, M].
    #[arg(long, default_value_t = 81)]
    points: usize,
    /// Emit psi_o, v_max, sigma_u_sq with the Normal variance set to V_max.
    #[arg(long)]
    ceiling: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Failure classes with their exit codes.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) => f.write_str(m),
        }
    }
}

impl From<gsd::Error> for CliError {
    fn from(e: gsd::Error) -> Self {
        match e {
            gsd::Error::Data(_) | gsd::Error::DegenerateSample(_) => CliError::Data(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<gsd::DataError> for CliError {
    fn from(e: gsd::DataError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(format!("i/o error: {e}"))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GSD_LOG_LEVEL", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(a) => commands::fit(a),
        Command::Pmf(a) => commands::pmf(a),
        Command::Sample(a) => commands::sample(a),
        Command::Gof(a) => commands::gof(a),
        Command::Batch(a) => commands::batch(a),
        Command::Simstudy(a) => commands::simstudy(a),
        Command::Curves(a) => commands::curves(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gsd: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
