//! Autoencoder-based nonlinear ICA: MLP encoder/decoder, the multiplicative
//! independence × reconstruction objective with exact gradients, Adam, and
//! the minibatch training loop.

mod checkpoint;
mod mlp;
mod objective;
mod optim;
mod train;

pub use checkpoint::{Checkpoint, CHECKPOINT_FORMAT_VERSION};
pub use mlp::{backward, forward, forward_traced, Activation, ForwardTrace, Layer, MlpParams, MlpSpec};
pub use objective::{
    encode, grad_total_cost, rec_error, total_cost, Autoencoder, CostParts, Gradients, LossKind,
    Objective,
};
pub use optim::{adam_step, sgd_step, AdamConfig, OptimizerKind, OptimizerState};
pub use train::{
    grid_search, history_csv, initial_model, train, validate, Grid, GridCell, GridResult,
    HistoryRecord, Selection, TrainConfig, TrainData, TrainOutcome, TrainState, Validation,
    HISTORY_HEADER,
};
