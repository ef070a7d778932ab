use std::fmt;
use std::str::FromStr;

use super::{ScheduleKind, TrainError};
use crate::config::KvConfig;

/// How per-class loss weights are derived from the training counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClassWeighting {
    #[default]
    InverseFrequency,
    Uniform,
}

impl fmt::Display for ClassWeighting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassWeighting::InverseFrequency => "inverse_frequency",
            ClassWeighting::Uniform => "uniform",
        })
    }
}

impl FromStr for ClassWeighting {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inverse_frequency" | "balanced" => Ok(ClassWeighting::InverseFrequency),
            "uniform" | "none" => Ok(ClassWeighting::Uniform),
            other => Err(format!("unknown class weighting {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    pub base_lr: f64,
    pub llrd_alpha: f64,
    pub micro_batch: usize,
    pub accumulation_steps: usize,
    pub warmup_fraction: f64,
    pub schedule: ScheduleKind,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
    pub gamma: f64,
    pub class_weighting: ClassWeighting,
    /// Multiply each sample's loss by its provenance weight.
    pub use_sample_weights: bool,
    pub weight_decay: f64,
    pub max_grad_norm: f64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            base_lr: 3e-5,
            llrd_alpha: 0.9,
            micro_batch: 8,
            accumulation_steps: 4,
            warmup_fraction: 0.15,
            schedule: ScheduleKind::WarmupCosine,
            max_epochs: 6,
            patience: 3,
            seed: 42,
            gamma: 2.0,
            class_weighting: ClassWeighting::InverseFrequency,
            use_sample_weights: true,
            weight_decay: 0.01,
            max_grad_norm: 1.0,
        }
    }
}

impl TrainingConfig {
    pub fn effective_batch(&self) -> usize {
        self.micro_batch * self.accumulation_steps
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: String| Err(TrainError::InvalidConfig(m));
        if !(self.base_lr.is_finite() && self.base_lr > 0.0) {
            return bad(format!("base_lr {} must be positive", self.base_lr));
        }
        if !(self.llrd_alpha > 0.0 && self.llrd_alpha <= 1.0) {
            return bad(format!("llrd_alpha {} outside (0, 1]", self.llrd_alpha));
        }
        if self.micro_batch == 0 || self.accumulation_steps == 0 {
            return bad("micro_batch and accumulation_steps must be >= 1".into());
        }
        if !(0.0..=1.0).contains(&self.warmup_fraction) {
            return bad(format!("warmup_fraction {} outside [0, 1]", self.warmup_fraction));
        }
        if self.max_epochs == 0 || self.patience == 0 {
            return bad("max_epochs and patience must be >= 1".into());
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return bad(format!("gamma {} must be >= 0", self.gamma));
        }
        if !(self.weight_decay >= 0.0 && self.max_grad_norm > 0.0) {
            return bad("weight_decay must be >= 0 and max_grad_norm > 0".into());
        }
        Ok(())
    }

    pub fn to_kv(&self) -> KvConfig {
        let mut kv = KvConfig::new();
        kv.set("base_lr", self.base_lr);
        kv.set("llrd_alpha", self.llrd_alpha);
        kv.set("micro_batch", self.micro_batch);
        kv.set("accumulation_steps", self.accumulation_steps);
        kv.set("warmup_fraction", self.warmup_fraction);
        kv.set("schedule", self.schedule);
        kv.set("max_epochs", self.max_epochs);
        kv.set("patience", self.patience);
        kv.set("seed", self.seed);
        kv.set("gamma", self.gamma);
        kv.set("class_weighting", self.class_weighting);
        kv.set("use_sample_weights", self.use_sample_weights);
        kv.set("weight_decay", self.weight_decay);
        kv.set("max_grad_norm", self.max_grad_norm);
        kv
    }

    /// Keys absent from `kv` keep their defaults.
    pub fn from_kv(kv: &KvConfig) -> Result<Self, TrainError> {
        let d = Self::default();
        let cfg = Self {
            base_lr: kv.parse_or("base_lr", d.base_lr)?,
            llrd_alpha: kv.parse_or("llrd_alpha", d.llrd_alpha)?,
            micro_batch: kv.parse_or("micro_batch", d.micro_batch)?,
            accumulation_steps: kv.parse_or("accumulation_steps", d.accumulation_steps)?,
            warmup_fraction: kv.parse_or("warmup_fraction", d.warmup_fraction)?,
            schedule: kv.parse_or("schedule", d.schedule)?,
            max_epochs: kv.parse_or("max_epochs", d.max_epochs)?,
            patience: kv.parse_or("patience", d.patience)?,
            seed: kv.parse_or("seed", d.seed)?,
            gamma: kv.parse_or("gamma", d.gamma)?,
            class_weighting: kv.parse_or("class_weighting", d.class_weighting)?,
            use_sample_weights: kv.parse_or("use_sample_weights", d.use_sample_weights)?,
            weight_decay: kv.parse_or("weight_decay", d.weight_decay)?,
            max_grad_norm: kv.parse_or("max_grad_norm", d.max_grad_norm)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
