use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::autoencoder::{Grid, TrainConfig};
use crate::baselines::Nonlinearity;
use crate::datagen::{MixingKind, IMAGE_DIMS};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum GenKind {
    NonlinearSynthetic,
    LinearSynthetic,
    Image,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub kind: GenKind,
    pub seed: u64,
    /// Synthetic sample count.
    pub n: usize,
    pub normalize: bool,
    /// Image study only.
    pub mixing: MixingKind,
    pub dim: Option<usize>,
    pub replications: Option<usize>,
    /// Directory of PGM images; the procedural corpus when absent.
    pub images: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainRunConfig {
    pub data: PathBuf,
    pub grid: Option<String>,
    pub train: TrainConfig,
}

/// `name=path` pair naming a method.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedPath {
    pub name: String,
    pub path: PathBuf,
}

impl std::str::FromStr for NamedPath {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (name, path) = s
            .split_once('=')
            .ok_or_else(|| format!("expected NAME=PATH, got {s:?}"))?;
        if name.is_empty() || name.contains([',', '"', '\n']) {
            return Err(format!("invalid method name {name:?}"));
        }
        Ok(Self {
            name: name.into(),
            path: path.into(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub data: PathBuf,
    pub models: Vec<NamedPath>,
    pub fastica: Vec<Nonlinearity>,
    pub fastica_seed: u64,
    pub fastica_max_iter: usize,
    pub baseline: bool,
    /// Directories of externally recovered sources, one `<dataset>.csv` per
    /// dataset, rows aligned with the test split.
    pub imports: Vec<NamedPath>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareConfig {
    pub reports: Vec<PathBuf>,
    pub require: Vec<String>,
}

/// Everything a command needs to reproduce its outputs, written to
/// `config.json` in the output directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    Gen(GenConfig),
    Train(TrainRunConfig),
    Eval(EvalConfig),
    Compare(CompareConfig),
}

pub const CONFIG_FILE: &str = "config.json";

impl ExperimentConfig {
    pub fn command(&self) -> &'static str {
        match self {
            Self::Gen(_) => "gen",
            Self::Train(_) => "train",
            Self::Eval(_) => "eval",
            Self::Compare(_) => "compare",
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            context: path.display().to_string(),
            reason: e.to_string(),
        })
    }

    /// Checks that would otherwise be enforced by flag parsing.
    pub fn check(&self) -> std::result::Result<(), String> {
        match self {
            Self::Gen(g) => {
                if g.kind == GenKind::Image {
                    match g.dim {
                        Some(d) if IMAGE_DIMS.contains(&d) => {}
                        Some(d) => {
                            return Err(format!("--dim must be one of 2, 5, 10, 20 (got {d})"))
                        }
                        None => return Err("--dim is required for image datasets".into()),
                    }
                    if g.replications == Some(0) {
                        return Err("--replications must be at least 1".into());
                    }
                }
                Ok(())
            }
            Self::Train(t) => {
                if let Some(g) = &t.grid {
                    Grid::parse(g).map_err(|e| e.to_string())?;
                }
                t.train.validate().map_err(|e| e.to_string())
            }
            Self::Eval(e) => {
                if e.models.is_empty() && e.fastica.is_empty() && !e.baseline && e.imports.is_empty() {
                    return Err("nothing to evaluate: give --model, --fastica, --baseline or --import".into());
                }
                Ok(())
            }
            Self::Compare(c) => {
                if c.reports.is_empty() {
                    return Err("give at least one --report".into());
                }
                Ok(())
            }
        }
    }
}
