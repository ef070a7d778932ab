//! Plain fine-tuning: class-weighted cross-entropy, one learning rate for
//! every layer, linear warmup then linear decay, no boolean features.

use std::fmt;
use std::str::FromStr;

use super::BaselineError;
use crate::data::Dataset;
use crate::model::{load_model, ModelConfig, TinyEncoder};
use crate::train::{train_loop, ClassWeighting, ScheduleKind, TrainOutcome, TrainingConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformerKind {
    Distil,
    Base,
}

impl TransformerKind {
    pub fn encoder_identifier(self) -> &'static str {
        match self {
            TransformerKind::Distil => "distilbert-base-uncased",
            TransformerKind::Base => "bert-base-uncased",
        }
    }

    pub fn batch_size(self) -> usize {
        match self {
            TransformerKind::Distil => 16,
            TransformerKind::Base => 8,
        }
    }
}

impl fmt::Display for TransformerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TransformerKind::Distil => "distil",
            TransformerKind::Base => "base",
        })
    }
}

impl FromStr for TransformerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "distil" | "distilbert" => Ok(Self::Distil),
            "base" | "bert" | "bert-base" => Ok(Self::Base),
            other => Err(format!("unknown transformer baseline {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformerBaseline {
    pub kind: TransformerKind,
    pub model: ModelConfig,
    pub training: TrainingConfig,
}

/// Model and training settings for `kind`. Swap `model` for an offline
/// backbone (e.g. the tiny encoder) to run without downloaded weights.
pub fn simple_transformer_config(kind: TransformerKind) -> TransformerBaseline {
    let model = ModelConfig {
        encoder_identifier: kind.encoder_identifier().to_string(),
        use_boolean_features: false,
        ..ModelConfig::default()
    };
    let training = TrainingConfig {
        base_lr: 2e-5,
        llrd_alpha: 1.0,
        micro_batch: kind.batch_size(),
        accumulation_steps: 1,
        warmup_fraction: 0.1,
        schedule: ScheduleKind::WarmupLinear,
        max_epochs: 4,
        patience: 4,
        gamma: 0.0,
        class_weighting: ClassWeighting::InverseFrequency,
        use_sample_weights: false,
        weight_decay: 0.01,
        max_grad_norm: 1.0,
        ..TrainingConfig::default()
    };
    TransformerBaseline { kind, model, training }
}

/// Fine-tune and return the weights of the best dev epoch.
///
/// Focal modulation, layer-wise decay and the feature branch are switched
/// off whatever `cfg` says.
pub fn simple_transformer_baseline(cfg: &TransformerBaseline, train: &Dataset, dev: &Dataset) -> Result<TrainOutcome<TinyEncoder>, BaselineError> {
    let mut model_cfg = cfg.model.clone();
    model_cfg.use_boolean_features = false;
    let training = TrainingConfig {
        gamma: 0.0,
        llrd_alpha: 1.0,
        ..cfg.training.clone()
    };
    let model = load_model(&model_cfg)?;
    Ok(train_loop(model, train, dev, &training)?)
}
