use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "ftirchem", version, about = "Classify FTIR absorbance spectra")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Cross-validate one pipeline or the full feature × classifier grid
    Evaluate(EvaluateArgs),
    /// Fit a pipeline on the whole dataset and save the model
    Train(TrainArgs),
    /// Classify spectra with a saved model
    Predict(PredictArgs),
    /// Paired t-test between two classes or two files
    Ttest(TtestArgs),
    /// Backward feature elimination
    Bfe(BfeArgs),
    /// Exhaustive search for the best contiguous band window
    Window(WindowArgs),
    /// KNN accuracy for a range of neighbour counts
    Sweepk(SweepkArgs),
    /// Two-dimensional PCA or LDA projection for plotting
    Project(ProjectArgs),
    /// Write a synthetic dataset
    Synth(SynthArgs),
}

/// Flags shared by the dataset commands.
#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// Labelled spectra CSV
    #[arg(long, value_name = "PATH")]
    pub data: Option<PathBuf>,
    /// Configuration file (`key = value` lines, `[section]` headers)
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    /// Output path
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Wavelength window in nm, e.g. 3150:3840
    #[arg(long, value_name = "LO:HI", allow_hyphen_values = true)]
    pub window: Option<String>,
    #[arg(long, value_name = "N")]
    pub folds: Option<usize>,
}

/// Pipeline overrides; each maps to one configuration key.
#[derive(Args, Debug, Clone, Default)]
pub struct PipelineArgs {
    /// FEATURES+CLASSIFIER, e.g. lda+knn, pca+rbf_svm, original+linear_svm
    #[arg(long, value_name = "SPEC")]
    pub pipeline: Option<String>,
    /// Neighbour count for KNN
    #[arg(long)]
    pub k: Option<usize>,
    /// KNN distance (euclidean or manhattan)
    #[arg(long)]
    pub metric: Option<String>,
    #[arg(long, value_name = "R")]
    pub lda_components: Option<usize>,
    /// Relative ridge added to the within-class scatter
    #[arg(long, value_name = "EPS")]
    pub ridge: Option<f64>,
    /// class-independent or class-dependent
    #[arg(long)]
    pub lda_variant: Option<String>,
    #[arg(long, value_name = "R")]
    pub pca_components: Option<usize>,
    /// SVM box constraint
    #[arg(long, value_name = "C")]
    pub svm_c: Option<f64>,
    /// RBF width (default: 1 / total feature variance)
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub svm_tol: Option<f64>,
    #[arg(long)]
    pub max_passes: Option<usize>,
    /// Any configuration key, e.g. --set knn.k=3 (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// Evaluate every feature method with every classifier
    #[arg(long)]
    pub grid: bool,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    /// Model file written by `train`
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,
    /// Spectra CSV without a label column (header of wavelengths, one row per sample)
    #[arg(long, value_name = "PATH", visible_alias = "data")]
    pub sample: PathBuf,
}

#[derive(Args, Debug)]
pub struct TtestArgs {
    #[command(flatten)]
    pub common: Common,
    /// First class (paired with --label-b in file order)
    #[arg(long)]
    pub label_a: Option<String>,
    #[arg(long)]
    pub label_b: Option<String>,
    /// Second labelled CSV whose rows pair with the rows of --data
    #[arg(long, value_name = "PATH")]
    pub data_b: Option<PathBuf>,
    /// One test per wavelength instead of one on the mean spectra
    #[arg(long)]
    pub per_band: bool,
}

#[derive(Args, Debug)]
pub struct BfeArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// Stop once the best removal scores more than this below the current score
    #[arg(long, default_value_t = 0.0)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 1)]
    pub min_features: usize,
}

#[derive(Args, Debug)]
pub struct WindowArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// Spacing of candidate window edges in columns
    #[arg(long, default_value_t = 1)]
    pub grid_step: usize,
    /// Narrowest window in columns
    #[arg(long, default_value_t = 1)]
    pub min_width: usize,
}

#[derive(Args, Debug)]
pub struct SweepkArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// Sweep k = 1..=KMAX
    #[arg(long, default_value_t = 9)]
    pub kmax: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProjectionMethod {
    Lda,
    Pca,
}

#[derive(Args, Debug)]
pub struct ProjectArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[arg(long, value_enum, default_value_t = ProjectionMethod::Lda)]
    pub method: ProjectionMethod,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Output CSV
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 14)]
    pub n_per_class: usize,
    /// Bands between 2500 and 4000 nm
    #[arg(long, default_value_t = 729)]
    pub points: usize,
    #[arg(long, default_value_t = 0.01)]
    pub noise_sd: f64,
    #[arg(long, default_value_t = 3450.0)]
    pub peak_center: f64,
    #[arg(long, default_value_t = 150.0)]
    pub peak_width: f64,
    #[arg(long, default_value_t = 2.0)]
    pub water_gain: f64,
}
