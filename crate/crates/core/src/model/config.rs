use std::fmt;
use std::str::FromStr;

use super::encoder::TinyEncoderConfig;
use super::ModelError;
use crate::config::KvConfig;
use crate::data::Task;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pooling {
    #[default]
    FirstToken,
}

impl fmt::Display for Pooling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("first_token")
    }
}

impl FromStr for Pooling {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "first_token" | "cls" | "FirstToken" => Ok(Pooling::FirstToken),
            other => Err(format!("unknown pooling {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub encoder_identifier: String,
    pub max_sequence_length: usize,
    pub task: Task,
    pub num_classes: usize,
    pub feature_width: usize,
    pub dropout: f64,
    pub pooling: Pooling,
    pub use_boolean_features: bool,
    /// Dimensions of the bundled tiny encoder; ignored by other backbones.
    pub vocab_size: usize,
    pub hidden_width: usize,
    pub layer_count: usize,
    pub init_seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        let tiny = TinyEncoderConfig::default();
        Self {
            encoder_identifier: super::encoder::TinyEncoder::IDENTIFIER.to_string(),
            max_sequence_length: 256,
            task: Task::Clarity,
            num_classes: 3,
            feature_width: 32,
            dropout: 0.1,
            pooling: Pooling::FirstToken,
            use_boolean_features: true,
            vocab_size: tiny.vocab_size,
            hidden_width: tiny.hidden_width,
            layer_count: tiny.layer_count,
            init_seed: 0,
        }
    }
}

impl ModelConfig {
    pub fn for_task(task: Task) -> Self {
        Self {
            task,
            num_classes: task.num_classes(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: String| Err(ModelError::InvalidConfig(m));
        if self.max_sequence_length < 16 {
            return bad(format!("max_sequence_length {} < 16", self.max_sequence_length));
        }
        if !matches!(self.num_classes, 3 | 9) {
            return bad(format!("num_classes {} not in {{3, 9}}", self.num_classes));
        }
        if self.num_classes != self.task.num_classes() {
            return bad(format!("task {} needs {} classes", self.task, self.task.num_classes()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad(format!("dropout {} outside [0, 1)", self.dropout));
        }
        if self.vocab_size <= 4 || self.hidden_width == 0 {
            return bad("encoder dimensions too small".into());
        }
        Ok(())
    }

    /// Width of the feature branch actually built (0 when disabled).
    pub fn effective_feature_width(&self) -> usize {
        if self.use_boolean_features {
            self.feature_width
        } else {
            0
        }
    }

    pub fn tiny_encoder(&self) -> TinyEncoderConfig {
        TinyEncoderConfig {
            vocab_size: self.vocab_size,
            hidden_width: self.hidden_width,
            layer_count: self.layer_count,
            max_positions: self.max_sequence_length,
        }
    }

    pub fn to_kv(&self) -> KvConfig {
        let mut kv = KvConfig::new();
        kv.set("encoder_identifier", &self.encoder_identifier);
        kv.set("max_sequence_length", self.max_sequence_length);
        kv.set("task", self.task);
        kv.set("num_classes", self.num_classes);
        kv.set("feature_width", self.feature_width);
        kv.set("dropout", self.dropout);
        kv.set("pooling", self.pooling);
        kv.set("use_boolean_features", self.use_boolean_features);
        kv.set("vocab_size", self.vocab_size);
        kv.set("hidden_width", self.hidden_width);
        kv.set("layer_count", self.layer_count);
        kv.set("init_seed", self.init_seed);
        kv
    }

    /// Keys absent from `kv` keep their defaults.
    pub fn from_kv(kv: &KvConfig) -> Result<Self, ModelError> {
        let d = Self::default();
        let task: Task = match kv.get("task") {
            Some(t) => t.parse().map_err(|e: crate::data::DataError| ModelError::InvalidConfig(e.to_string()))?,
            None => d.task,
        };
        let cfg = Self {
            encoder_identifier: kv.get("encoder_identifier").unwrap_or(&d.encoder_identifier).to_string(),
            max_sequence_length: kv.parse_or("max_sequence_length", d.max_sequence_length)?,
            task,
            num_classes: kv.parse_or("num_classes", task.num_classes())?,
            feature_width: kv.parse_or("feature_width", d.feature_width)?,
            dropout: kv.parse_or("dropout", d.dropout)?,
            pooling: kv.parse_or("pooling", d.pooling)?,
            use_boolean_features: kv.parse_or("use_boolean_features", d.use_boolean_features)?,
            vocab_size: kv.parse_or("vocab_size", d.vocab_size)?,
            hidden_width: kv.parse_or("hidden_width", d.hidden_width)?,
            layer_count: kv.parse_or("layer_count", d.layer_count)?,
            init_seed: kv.parse_or("init_seed", d.init_seed)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
