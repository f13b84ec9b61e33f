use std::path::PathBuf;

use clap::builder::TypedValueParser;
use clap::{Args, Parser, Subcommand};

use crate::autoencoder::{Activation, LossKind, OptimizerKind, Selection, TrainConfig};
use crate::baselines::Nonlinearity;
use crate::cli::config::{
    CompareConfig, EvalConfig, ExperimentConfig, GenConfig, GenKind, NamedPath, TrainRunConfig,
};
use crate::datagen::MixingKind;
use crate::independence::{ShiftMode, ZeroDistance};

/// Environment variable naming the default output root.
pub const OUT_ROOT_ENV: &str = "CWICA_OUT_ROOT";

#[derive(Debug, Parser)]
#[command(name = "cwica", version, about = "Nonlinear ICA with Cramer-Wold autoencoders")]
pub struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output directory. Defaults to a config-derived name under
    /// $CWICA_OUT_ROOT (or ./runs).
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Re-run from a config echo; other flags of the command are ignored.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Worker threads for grid cells and dataset replications.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a dataset directory.
    Gen(GenArgs),
    /// Train an autoencoder (or a grid of them) on a dataset.
    Train(TrainArgs),
    /// Evaluate models and baselines on the test split.
    Eval(EvalArgs),
    /// Merge reports into comparison tables and mean ranks.
    Compare(CompareArgs),
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Gen(a) => &a.common,
            Command::Train(a) => &a.common,
            Command::Eval(a) => &a.common,
            Command::Compare(a) => &a.common,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Gen(_) => "gen",
            Command::Train(_) => "train",
            Command::Eval(_) => "eval",
            Command::Compare(_) => "compare",
        }
    }

    pub fn to_config(&self) -> ExperimentConfig {
        match self {
            Command::Gen(a) => ExperimentConfig::Gen(a.to_config()),
            Command::Train(a) => ExperimentConfig::Train(a.to_config()),
            Command::Eval(a) => ExperimentConfig::Eval(a.to_config()),
            Command::Compare(a) => ExperimentConfig::Compare(a.to_config()),
        }
    }

    pub fn has_config_source(&self) -> bool {
        self.common().config.is_some()
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub common: Common,

    #[arg(long, value_enum, required_unless_present = "config")]
    pub kind: Option<GenKind>,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Rows of the synthetic datasets.
    #[arg(long, default_value_t = 4000)]
    pub n: usize,

    /// Keep raw observations instead of standardizing each column.
    #[arg(long)]
    pub no_normalize_obs: bool,

    /// Mixing pipeline for image datasets.
    #[arg(long, default_value = "nonlinear")]
    pub mixing: MixingKind,

    /// Number of image sources (= observed dimension).
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(["2", "5", "10", "20"])
        .map(|s| s.parse::<usize>().expect("listed values are numeric")))]
    pub dim: Option<usize>,

    /// Image replications; defaults to 50/50/20/10 for dim 2/5/10/20.
    #[arg(long)]
    pub replications: Option<usize>,

    /// Directory of 8-bit binary PGM images (default: procedural textures).
    #[arg(long)]
    pub images: Option<PathBuf>,
}

impl GenArgs {
    fn to_config(&self) -> GenConfig {
        GenConfig {
            kind: self.kind.unwrap_or(GenKind::NonlinearSynthetic),
            seed: self.seed,
            n: self.n,
            normalize: !self.no_normalize_obs,
            mixing: self.mixing,
            dim: self.dim,
            replications: self.replications,
            images: self.images.clone(),
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: Common,

    /// Dataset directory, or a directory of dataset directories.
    #[arg(long, required_unless_present = "config")]
    pub data: Option<PathBuf>,

    #[arg(long, default_value = "cw")]
    pub loss: LossKind,

    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,

    #[arg(long = "bw-mult", default_value_t = 1.0)]
    pub bw_mult: f64,

    #[arg(long, default_value_t = 256)]
    pub batch: usize,

    #[arg(long, default_value_t = 30_000)]
    pub iters: usize,

    #[arg(long, default_value_t = 500)]
    pub eval_every: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Grid over hyper-parameters, e.g. "lr=1e-4,1e-3;bw=0.5,1,2;batch=128,256".
    #[arg(long)]
    pub grid: Option<String>,

    #[arg(long, default_value = "adam")]
    pub optimizer: OptimizerKind,

    #[arg(long, default_value = "replacement")]
    pub shift_mode: ShiftMode,

    /// Stop gradients through the shifted sample.
    #[arg(long)]
    pub detach_shift: bool,

    /// Kernel value at zero distance: "continuous" (1) or "excluded" (0).
    #[arg(long, default_value = "continuous")]
    pub zero_distance: ZeroDistance,

    /// Hidden layer widths of the encoder, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "64,64")]
    pub hidden: Vec<usize>,

    #[arg(long, default_value = "tanh")]
    pub activation: Activation,

    /// Latent size; defaults to the number of sources.
    #[arg(long)]
    pub latent_dim: Option<usize>,

    /// Snapshot selection: "total-loss" or "dcor".
    #[arg(long, default_value = "total-loss")]
    pub selection: Selection,
}

impl TrainArgs {
    fn to_config(&self) -> TrainRunConfig {
        TrainRunConfig {
            data: self.data.clone().unwrap_or_default(),
            grid: self.grid.clone(),
            train: TrainConfig {
                loss_kind: self.loss,
                learning_rate: self.lr,
                batch_size: self.batch,
                bandwidth_multiplier: self.bw_mult,
                max_iterations: self.iters,
                eval_every: self.eval_every,
                seed: self.seed,
                optimizer: self.optimizer,
                shift_mode: self.shift_mode,
                detach_shift: self.detach_shift,
                zero_distance: self.zero_distance,
                hidden_sizes: self.hidden.clone(),
                activation: self.activation,
                latent_dim: self.latent_dim,
                selection: self.selection,
                ..TrainConfig::default()
            },
        }
    }
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: Common,

    /// Dataset directory, or a directory of dataset directories.
    #[arg(long, required_unless_present = "config")]
    pub data: Option<PathBuf>,

    /// Trained model as NAME=DIR (a `train` output directory).
    #[arg(long = "model")]
    pub models: Vec<NamedPath>,

    /// Run native FastICA with these contrasts (logcosh, exp, kurtosis).
    #[arg(long, value_delimiter = ',')]
    pub fastica: Vec<Nonlinearity>,

    #[arg(long, default_value_t = 0)]
    pub fastica_seed: u64,

    #[arg(long, default_value_t = 1000)]
    pub fastica_max_iter: usize,

    /// Include the standardized-observations baseline.
    #[arg(long)]
    pub baseline: bool,

    /// External recovered sources as NAME=DIR with one <dataset>.csv each.
    #[arg(long = "import")]
    pub imports: Vec<NamedPath>,
}

impl EvalArgs {
    fn to_config(&self) -> EvalConfig {
        EvalConfig {
            data: self.data.clone().unwrap_or_default(),
            models: self.models.clone(),
            fastica: self.fastica.clone(),
            fastica_seed: self.fastica_seed,
            fastica_max_iter: self.fastica_max_iter,
            baseline: self.baseline,
            imports: self.imports.clone(),
        }
    }
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: Common,

    /// Report CSV files to merge.
    #[arg(long = "report")]
    pub reports: Vec<PathBuf>,

    /// Methods that must be present in every group.
    #[arg(long, value_delimiter = ',')]
    pub require: Vec<String>,
}

impl CompareArgs {
    fn to_config(&self) -> CompareConfig {
        CompareConfig {
            reports: self.reports.clone(),
            require: self.require.clone(),
        }
    }
}
