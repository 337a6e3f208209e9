use clap::{Args, Parser, Subcommand};
use std::net::SocketAddr;
use std::path::PathBuf;
use svrt_core::dataset::DatasetConfig;
use svrt_core::nn::TrainingConfig;
use svrt_core::problems::{ProblemId, VariantKind};
use svrt_core::Result;

#[derive(Debug, Parser)]
#[command(name = "svrt", version, about = "Synthetic same/different shape problems and a LeNet baseline")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a dataset to PGM files plus a manifest.
    Generate(GenerateArgs),
    /// Train a network and save a checkpoint.
    Train(TrainArgs),
    /// Test accuracy of a saved checkpoint.
    Eval(EvalArgs),
    /// Train and evaluate one model per problem.
    Bench(BenchArgs),
    /// Train on control, leak and null variants and flag learnable ones.
    Audit(AuditArgs),
    /// Compare accuracy across image resolutions.
    Ablate(AblateArgs),
    /// Accuracy as a function of training-set size.
    Sweep(SweepArgs),
    /// Cohort accuracy from solved and unsolved participant counts.
    HumanAccuracy(HumanArgs),
    /// Serve the human-trial HTTP API.
    Serve(ServeArgs),
    /// Render a results CSV as a table.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Dataset variant: original, identical_control, null or leak_<kind>.
    #[arg(long, default_value = "original")]
    pub variant: VariantKind,
    /// Training images per class.
    #[arg(long, default_value_t = 2000)]
    pub n_train: usize,
    /// Test images per class.
    #[arg(long, default_value_t = 1000)]
    pub n_test: usize,
    #[arg(long, default_value_t = 64)]
    pub image_size: u32,
    /// Dataset master seed; defaults to `--seed`.
    #[arg(long)]
    pub master_seed: Option<u64>,
    /// Root directory for generated datasets.
    #[arg(long, default_value = "data")]
    pub output_path: PathBuf,
}

impl DataArgs {
    pub fn config(&self, problem: ProblemId, seed: u64) -> DatasetConfig {
        DatasetConfig {
            problem,
            variant: self.variant,
            n_train: self.n_train,
            n_test: self.n_test,
            image_size: self.image_size,
            master_seed: self.master_seed.unwrap_or(seed),
            output_path: self.output_path.clone(),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct TrainingArgs {
    #[arg(long, default_value_t = 5000)]
    pub iterations: usize,
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 0.00005)]
    pub weight_decay: f64,
    #[arg(long, default_value_t = 0.001)]
    pub learning_rate: f64,
    #[arg(long, default_value = "lenet64")]
    pub architecture: String,
}

impl TrainingArgs {
    pub fn config(&self, seed: u64) -> TrainingConfig {
        TrainingConfig {
            iterations: self.iterations,
            batch_size: self.batch_size,
            seed,
            weight_decay: self.weight_decay,
            learning_rate: self.learning_rate,
            architecture: self.architecture.clone(),
        }
    }
}

pub fn parse_problem(s: &str) -> Result<ProblemId> {
    let v: u32 = s
        .trim()
        .parse()
        .map_err(|_| svrt_core::Error::InvalidArgument(format!("problem id must be a number, got `{s}`")))?;
    ProblemId::new(v)
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_parser = parse_problem)]
    pub problem: ProblemId,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, value_parser = parse_problem)]
    pub problem: ProblemId,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub training: TrainingArgs,
    /// Training seed; also the dataset master seed unless `--master-seed` is given.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "model.ckpt")]
    pub checkpoint: PathBuf,
    /// Write the per-iteration loss as JSON lines.
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Evaluate on the test split of a dataset directory instead of a generated config.
    #[arg(long, conflicts_with = "problem")]
    pub dataset_dir: Option<PathBuf>,
    #[arg(long, value_parser = parse_problem, required_unless_present = "dataset_dir")]
    pub problem: Option<ProblemId>,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Comma-separated problem ids; all problems when omitted.
    #[arg(long, value_delimiter = ',', value_parser = parse_problem)]
    pub problems: Vec<ProblemId>,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub training: TrainingArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write result rows to this CSV file.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[arg(long, value_parser = parse_problem)]
    pub problem: ProblemId,
    /// Comma-separated variants; control (where defined), every leak and null when omitted.
    #[arg(long, value_delimiter = ',')]
    pub variants: Vec<VariantKind>,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub training: TrainingArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    #[arg(long, value_parser = parse_problem)]
    pub problem: ProblemId,
    #[arg(long, value_delimiter = ',', default_value = "64,128")]
    pub sizes: Vec<u32>,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub training: TrainingArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_parser = parse_problem)]
    pub problem: ProblemId,
    /// Comma-separated training images per class, ascending.
    #[arg(long, value_delimiter = ',', default_value = "100,200,400,1000,2000")]
    pub grid: Vec<usize>,
    #[arg(long, default_value_t = 0.9)]
    pub threshold: f64,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub training: TrainingArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct HumanArgs {
    /// Participants who solved the problem.
    #[arg(long)]
    pub solved: u64,
    /// Participants who did not.
    #[arg(long)]
    pub unsolved: u64,
    /// Accepted for uniformity; the computation is deterministic.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: SocketAddr,
    /// Comma-separated problems to serve; all when omitted.
    #[arg(long, value_delimiter = ',', value_parser = parse_problem)]
    pub problems: Vec<ProblemId>,
    /// Consecutive correct answers that solve a session.
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value_t = 50)]
    pub max_trials: usize,
    #[arg(long, default_value_t = 128)]
    pub image_size: u32,
    /// Seeds session ids and trial images.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Append every answered trial to this JSON-lines file.
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Results CSV files to merge.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Also write the merged rows to this CSV file.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Accepted for uniformity; reports are deterministic.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}
