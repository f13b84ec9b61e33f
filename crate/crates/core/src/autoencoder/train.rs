use serde::{Deserialize, Serialize};

use crate::autoencoder::checkpoint::Checkpoint;
use crate::autoencoder::mlp::{Activation, MlpSpec};
use crate::autoencoder::objective::{Autoencoder, CostParts, LossKind, Objective};
use crate::autoencoder::optim::{adam_step, sgd_step, AdamConfig, OptimizerKind, OptimizerState};
use crate::error::{Error, Result};
use crate::evaluation::{eval_latents, LatentMetrics};
use crate::independence::{ShiftMode, ZeroDistance};
use crate::math::{Matrix, Rng};

/// Which validation number picks the best snapshot.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Selection {
    #[default]
    TotalLoss,
    Dcor,
}

impl std::str::FromStr for Selection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "total-loss" => Ok(Self::TotalLoss),
            "dcor" => Ok(Self::Dcor),
            other => Err(Error::Config(format!("unknown selection criterion {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub loss_kind: LossKind,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub bandwidth_multiplier: f64,
    pub max_iterations: usize,
    pub eval_every: usize,
    pub seed: u64,
    pub adam: AdamConfig,
    pub optimizer: OptimizerKind,
    pub shift_mode: ShiftMode,
    pub detach_shift: bool,
    pub zero_distance: ZeroDistance,
    /// Encoder hidden widths; the decoder mirrors them.
    pub hidden_sizes: Vec<usize>,
    pub activation: Activation,
    /// Number of recovered sources. Defaults to the source count when the
    /// dataset has sources.
    pub latent_dim: Option<usize>,
    pub selection: Selection,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            loss_kind: LossKind::Cw,
            learning_rate: 1e-3,
            batch_size: 256,
            bandwidth_multiplier: 1.0,
            max_iterations: 30_000,
            eval_every: 500,
            seed: 0,
            adam: AdamConfig::default(),
            optimizer: OptimizerKind::Adam,
            shift_mode: ShiftMode::Replacement,
            detach_shift: false,
            zero_distance: ZeroDistance::Continuous,
            hidden_sizes: vec![64, 64],
            activation: Activation::Tanh,
            latent_dim: None,
            selection: Selection::TotalLoss,
        }
    }
}

impl TrainConfig {
    pub fn objective(&self) -> Objective {
        Objective {
            kind: self.loss_kind,
            bandwidth_multiplier: self.bandwidth_multiplier,
            shift_mode: self.shift_mode,
            detach_shift: self.detach_shift,
            zero_distance: self.zero_distance,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning rate {} is invalid", self.learning_rate)));
        }
        if !(self.bandwidth_multiplier > 0.0 && self.bandwidth_multiplier.is_finite()) {
            return Err(Error::Config(format!(
                "bandwidth multiplier {} must be positive",
                self.bandwidth_multiplier
            )));
        }
        if self.batch_size < 2 {
            return Err(Error::Config("batch size must be at least 2".into()));
        }
        if self.eval_every == 0 {
            return Err(Error::Config("eval_every must be at least 1".into()));
        }
        Ok(())
    }

    /// Encoder `input → hidden… → latent` and its mirrored decoder.
    pub fn architecture(&self, input_dim: usize, latent_dim: usize) -> Result<(MlpSpec, MlpSpec)> {
        let mut sizes = vec![input_dim];
        sizes.extend(&self.hidden_sizes);
        sizes.push(latent_dim);
        let enc = MlpSpec::uniform(sizes, self.activation)?;
        let dec = enc.mirrored();
        Ok((enc, dec))
    }
}

/// Training rows plus the validation set used for monitoring and selection.
#[derive(Clone, Copy, Debug)]
pub struct TrainData<'a> {
    pub train: &'a Matrix,
    pub validation: &'a Matrix,
    pub validation_sources: Option<&'a Matrix>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryRecord {
    pub iteration: usize,
    pub cost: f64,
    pub indep: f64,
    pub rec: f64,
    pub val_cost: f64,
    pub val_maxcorr: Option<f64>,
    pub val_dcor: f64,
    pub val_mse: f64,
}

pub const HISTORY_HEADER: &str = "iteration,cost,indep,rec,val_cost,val_maxcorr,val_dcor,val_mse";

impl HistoryRecord {
    pub fn csv_line(&self) -> String {
        let maxcorr = self.val_maxcorr.map_or(String::new(), |v| v.to_string());
        format!(
            "{},{},{},{},{},{},{},{}",
            self.iteration, self.cost, self.indep, self.rec, self.val_cost, maxcorr, self.val_dcor, self.val_mse
        )
    }
}

pub fn history_csv(history: &[HistoryRecord]) -> String {
    let mut out = String::from(HISTORY_HEADER);
    out.push('\n');
    for h in history {
        out.push_str(&h.csv_line());
        out.push('\n');
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainState {
    pub model: Autoencoder,
    pub optimizer: OptimizerState,
    pub iteration: usize,
    pub history: Vec<HistoryRecord>,
}

impl TrainState {
    pub fn new(model: Autoencoder) -> Self {
        let optimizer = OptimizerState::new(model.num_params());
        Self {
            model,
            optimizer,
            iteration: 0,
            history: Vec::new(),
        }
    }

    pub fn step(&mut self, grads: &crate::autoencoder::Gradients, cfg: &TrainConfig) {
        match cfg.optimizer {
            OptimizerKind::Adam => {
                adam_step(&mut self.model, &mut self.optimizer, grads, cfg.learning_rate, &cfg.adam)
            }
            OptimizerKind::Sgd => sgd_step(&mut self.model, &mut self.optimizer, grads, cfg.learning_rate),
        }
        self.iteration += 1;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainOutcome {
    pub final_state: TrainState,
    /// Snapshot with the best validation score under the configured
    /// selection criterion.
    pub best_model: Autoencoder,
    pub best_iteration: usize,
    pub best_score: f64,
}

/// Validation objective and metrics for a model.
#[derive(Clone, Debug, PartialEq)]
pub struct Validation {
    pub parts: CostParts,
    pub metrics: LatentMetrics,
}

/// Evaluates `model` on a validation set. The shift draw comes from a
/// dedicated stream re-created on every call, so scores are comparable
/// across iterations.
pub fn validate(model: &Autoencoder, data: &TrainData<'_>, cfg: &TrainConfig) -> Result<Validation> {
    let obj = cfg.objective();
    let mut rng = Rng::substream(cfg.seed, "validation-shift");
    let shift = obj.draw_shift(data.validation.rows(), model.latent_dim(), &mut rng)?;
    let parts = obj.cost_with_shift(model, data.validation, shift.as_ref())?;
    let z = model.encode(data.validation)?;
    let xhat = model.decode(&z)?;
    let metrics = eval_latents(data.validation_sources, &z, Some((data.validation, &xhat)))?;
    Ok(Validation { parts, metrics })
}

fn resolve_latent_dim(data: &TrainData<'_>, cfg: &TrainConfig) -> Result<usize> {
    match (cfg.latent_dim, data.validation_sources) {
        (Some(d), _) if d >= 2 => Ok(d),
        (Some(d), _) => Err(Error::Config(format!("latent dimension {d} is below 2"))),
        (None, Some(y)) if y.cols() >= 2 => Ok(y.cols()),
        _ => Err(Error::Config(
            "latent dimension must be given when sources are unavailable".into(),
        )),
    }
}

/// Fresh model for `cfg`, initialized from the "init" stream.
pub fn initial_model(input_dim: usize, latent_dim: usize, cfg: &TrainConfig) -> Result<Autoencoder> {
    let (enc, dec) = cfg.architecture(input_dim, latent_dim)?;
    Autoencoder::new(enc, dec, &mut Rng::substream(cfg.seed, "init"))
}

/// Minibatch training loop with a fixed iteration budget.
///
/// Every iteration samples a batch uniformly with replacement, draws a fresh
/// shift, and takes one optimizer step on the multiplicative objective.
/// Every `eval_every` iterations (and at iteration 0) the validation set is
/// scored and a history record is appended.
pub fn train(data: &TrainData<'_>, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    let n_train = data.train.rows();
    if n_train < 2 || data.validation.rows() < 2 {
        return Err(Error::Config("train and validation splits need at least 2 rows".into()));
    }
    if data.validation.cols() != data.train.cols() {
        return Err(Error::Dimension("train and validation columns differ".into()));
    }
    if cfg.batch_size > n_train {
        return Err(Error::Config(format!(
            "batch size {} exceeds {} training rows",
            cfg.batch_size, n_train
        )));
    }
    let latent_dim = resolve_latent_dim(data, cfg)?;
    let model = initial_model(data.train.cols(), latent_dim, cfg)?;
    let mut state = TrainState::new(model);
    let obj = cfg.objective();
    let mut batch_rng = Rng::substream(cfg.seed, "batches");
    let mut shift_rng = Rng::substream(cfg.seed, "shift");

    let mut best_model = state.model.clone();
    let mut best_iteration = 0;
    let mut best_score = f64::INFINITY;

    for it in 0..=cfg.max_iterations {
        let record = it % cfg.eval_every == 0;
        let stepping = it < cfg.max_iterations;
        if !record && !stepping {
            break;
        }
        let idx: Vec<usize> = (0..cfg.batch_size).map(|_| batch_rng.index(n_train)).collect();
        let batch = data.train.select_rows(&idx)?;
        let shift = obj.draw_shift(batch.rows(), latent_dim, &mut shift_rng)?;
        let (parts, grads) = if stepping {
            let (p, g) = obj.grad_with_shift(&state.model, &batch, shift.as_ref())?;
            (p, Some(g))
        } else {
            (obj.cost_with_shift(&state.model, &batch, shift.as_ref())?, None)
        };
        if !parts.cost.is_finite() || grads.as_ref().is_some_and(|g| !g.is_finite()) {
            return Err(Error::Diverged {
                iteration: it,
                reason: format!("cost {} (indep {}, rec {})", parts.cost, parts.indep, parts.rec),
                last_finite: Box::new(Checkpoint::from_state(&state, cfg)),
            });
        }

        if record {
            let v = validate(&state.model, data, cfg)?;
            let score = match cfg.selection {
                Selection::TotalLoss => v.parts.cost,
                Selection::Dcor => v.metrics.dcor,
            };
            if score < best_score {
                best_score = score;
                best_iteration = it;
                best_model = state.model.clone();
            }
            log::debug!(
                "iter {it}: cost {:.4e} val_cost {:.4e} val_dcor {:.4} val_maxcorr {:?}",
                parts.cost,
                v.parts.cost,
                v.metrics.dcor,
                v.metrics.max_corr
            );
            state.history.push(HistoryRecord {
                iteration: it,
                cost: parts.cost,
                indep: parts.indep,
                rec: parts.rec,
                val_cost: v.parts.cost,
                val_maxcorr: v.metrics.max_corr,
                val_dcor: v.metrics.dcor,
                val_mse: v.metrics.mse.unwrap_or(0.0),
            });
        }
        if let Some(g) = grads {
            state.step(&g, cfg);
        }
    }

    Ok(TrainOutcome {
        final_state: state,
        best_model,
        best_iteration,
        best_score,
    })
}

/// One cell of a hyper-parameter grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridCell {
    pub config: TrainConfig,
    pub outcome: TrainOutcome,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridResult {
    pub cells: Vec<GridCell>,
    pub best: usize,
}

impl GridResult {
    pub fn best_cell(&self) -> &GridCell {
        &self.cells[self.best]
    }
}

/// Hyper-parameter axes. Empty axes fall back to the template's value.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub learning_rates: Vec<f64>,
    pub bandwidth_multipliers: Vec<f64>,
    pub batch_sizes: Vec<usize>,
}

impl Grid {
    /// Parses `lr=1e-4,1e-3;bw=0.5,1,2;batch=128,256`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut grid = Grid::default();
        for part in text.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, values) = part
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("grid axis {part:?} lacks '='")))?;
            let bad = |v: &str| Error::Config(format!("bad grid value {v:?} for {key}"));
            let items = values.split(',').map(str::trim);
            match key.trim() {
                "lr" => {
                    grid.learning_rates = items
                        .map(|v| v.parse().map_err(|_| bad(v)))
                        .collect::<Result<_>>()?
                }
                "bw" => {
                    grid.bandwidth_multipliers = items
                        .map(|v| v.parse().map_err(|_| bad(v)))
                        .collect::<Result<_>>()?
                }
                "batch" => {
                    grid.batch_sizes = items
                        .map(|v| v.parse().map_err(|_| bad(v)))
                        .collect::<Result<_>>()?
                }
                other => return Err(Error::Config(format!("unknown grid axis {other:?}"))),
            }
        }
        Ok(grid)
    }

    /// Cartesian product over the axes, learning rate outermost.
    pub fn configs(&self, template: &TrainConfig) -> Vec<TrainConfig> {
        let lrs = if self.learning_rates.is_empty() {
            vec![template.learning_rate]
        } else {
            self.learning_rates.clone()
        };
        let bws = if self.bandwidth_multipliers.is_empty() {
            vec![template.bandwidth_multiplier]
        } else {
            self.bandwidth_multipliers.clone()
        };
        let batches = if self.batch_sizes.is_empty() {
            vec![template.batch_size]
        } else {
            self.batch_sizes.clone()
        };
        let mut out = Vec::new();
        for &lr in &lrs {
            for &bw in &bws {
                for &batch in &batches {
                    out.push(TrainConfig {
                        learning_rate: lr,
                        bandwidth_multiplier: bw,
                        batch_size: batch,
                        ..template.clone()
                    });
                }
            }
        }
        out
    }
}

/// Trains one model per grid cell and selects the smallest validation score.
/// Cells share the template seed, so duplicated cells give identical
/// results; `jobs > 1` trains cells on a thread pool.
pub fn grid_search(
    data: &TrainData<'_>,
    grid: &Grid,
    template: &TrainConfig,
    jobs: usize,
) -> Result<GridResult> {
    let configs = grid.configs(template);
    let outcomes: Vec<Result<TrainOutcome>> = if jobs > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {jobs} workers: {e}")))?;
        pool.install(|| configs.par_iter().map(|c| train(data, c)).collect())
    } else {
        configs.iter().map(|c| train(data, c)).collect()
    };
    let mut cells = Vec::with_capacity(configs.len());
    for (config, outcome) in configs.into_iter().zip(outcomes) {
        cells.push(GridCell {
            config,
            outcome: outcome?,
        });
    }
    let best = cells
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.outcome.best_score.total_cmp(&b.1.outcome.best_score))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::Config("grid is empty".into()))?;
    Ok(GridResult { cells, best })
}
