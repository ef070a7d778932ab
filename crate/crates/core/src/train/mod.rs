//! Focal-loss fine-tuning with layer-wise learning-rate decay, warmup and
//! cosine decay, gradient accumulation and early stopping.

mod config;
mod focal;
mod grid;
mod llrd;
mod optimizer;
mod schedule;
pub(crate) mod trainer;

use std::path::PathBuf;

pub use config::{ClassWeighting, TrainingConfig};
pub use focal::{inverse_frequency_weights, FocalLoss, Reduction};
pub use grid::{grid_search, render_grid_table, GridRow, GridScore, GridSpec};
pub use llrd::{llrd_param_groups, tensor_learning_rates, ParamGroup};
pub use optimizer::{clip_grad_norm, AdamW, AdamWConfig};
pub use schedule::{lr_multiplier, LrSchedule, ScheduleKind};
pub use trainer::{
    check_validation_labels, train_loop, EarlyStopping, EpochRecord, EpochStats, StopDecision, TrainHistory,
    TrainOutcome, Trainer,
};

pub use crate::data::{stratified_kfold, Fold};

use crate::config::ConfigError;
use crate::data::DataError;
use crate::eval::EvalError;
use crate::model::ModelError;

#[derive(Debug, thiserror::Error)]
pub enum TrainError {
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("class code {0} has no records")]
    EmptyClass(usize),
    #[error("parameter {0:?} has no layer depth")]
    MissingDepth(String),
    #[error("non-finite logits")]
    NonFiniteLogits,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("{0} set is empty")]
    EmptyDataset(String),
    #[error("degenerate validation set: all {count} dev labels are {label:?}; refusing to select checkpoints on placeholder labels")]
    DegenerateValidation { count: usize, label: String },
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl From<ConfigError> for TrainError {
    fn from(e: ConfigError) -> Self {
        TrainError::InvalidConfig(e.to_string())
    }
}
