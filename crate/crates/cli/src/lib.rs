//! `morphforge` command line: one subcommand per pipeline stage, baseline
//! training and scoring, evaluation, and the review service.

mod commands;
pub mod server;

use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use commands::run;

#[derive(Debug, Parser)]
#[command(name = "morphforge", version, about = "Face-morph dataset pipeline and MAD evaluation")]
#[command(arg_required_else_help = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Keep the highest-quality records of a quality CSV
    Filter(FilterArgs),
    /// Split kept ids into bona fide and morph pool
    Split(SplitArgs),
    /// Draw key images and partners from a morph pool
    Pair(PairArgs),
    /// Morph two landmarked images
    Morph(MorphArgs),
    /// Re-run the automatic artifact check on pending attacks
    Inspect(InspectArgs),
    /// Serve the review API for one manifest
    ReviewServe(ReviewServeArgs),
    /// Train the baseline detector on a split manifest
    TrainBaseline(TrainArgs),
    /// Score a split manifest with a trained model
    Score(ScoreArgs),
    /// Compute the MAD report from a score file
    Eval(EvalArgs),
    /// Run filter, split, pair, morph and inspect for both splits
    Pipeline(PipelineArgs),
    /// Generate a synthetic two-split corpus with a desk-scale config
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    /// Quality CSV with an `image_id,quality` header
    #[arg(long)]
    pub quality: PathBuf,
    #[arg(long)]
    pub keep: usize,
    /// Output file, one id per line
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// Id list as written by `filter`
    #[arg(long)]
    pub ids: PathBuf,
    #[arg(long)]
    pub seed: u64,
    /// Stream label, normally the split name
    #[arg(long, default_value = "train")]
    pub label: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PairArgs {
    /// Split file as written by `split`
    #[arg(long)]
    pub pool: PathBuf,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value = "train")]
    pub label: String,
    #[arg(long)]
    pub n_keys: usize,
    #[arg(long, default_value_t = 5)]
    pub partners_per_key: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MorphArgs {
    #[arg(long)]
    pub image_a: PathBuf,
    #[arg(long)]
    pub landmarks_a: PathBuf,
    #[arg(long)]
    pub image_b: PathBuf,
    #[arg(long)]
    pub landmarks_b: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub blend: f64,
    /// Warping factor; drawn uniformly from [0, 1] with --seed when absent
    #[arg(long)]
    pub warp: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Triangulate landmarks only, without frame points
    #[arg(long)]
    pub no_boundary: bool,
    #[arg(long)]
    pub out: PathBuf,
    /// Where to write the morph landmarks (default: next to --out as .json)
    #[arg(long)]
    pub out_landmarks: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub black_luma: Option<f64>,
    #[arg(long)]
    pub black_fraction: Option<f64>,
    #[arg(long)]
    pub mouth_dilation: Option<f64>,
    /// Report without rewriting the manifest
    #[arg(long)]
    pub dry_run: bool,
}

#[derive(Debug, Args)]
pub struct ReviewServeArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, default_value = "127.0.0.1:8787")]
    pub bind: SocketAddr,
    /// Audit log (default: `<manifest stem>.audit.jsonl` beside the manifest)
    #[arg(long)]
    pub audit_log: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum HeadArg {
    Sigmoid,
    Softmax2,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training split manifest
    #[arg(long)]
    pub manifest: PathBuf,
    /// TOML file with training hyper-parameters
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub weight_decay: Option<f64>,
    #[arg(long)]
    pub max_epochs: Option<usize>,
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long, value_enum)]
    pub head: Option<HeadArg>,
    /// Model JSON output
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub manifest: PathBuf,
    /// Score CSV output
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub scores: PathBuf,
    /// Report JSON output
    #[arg(long)]
    pub out: PathBuf,
    /// Optional ROC CSV output
    #[arg(long)]
    pub roc: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory, overriding the config
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 250)]
    pub per_split: usize,
    #[arg(long, default_value_t = 128)]
    pub size: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}
