//! Learning-rate multipliers over optimizer steps.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScheduleKind {
    /// Linear warmup, then half-cosine decay to zero.
    #[default]
    WarmupCosine,
    /// Linear warmup, then linear decay to zero.
    WarmupLinear,
}

impl fmt::Display for ScheduleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScheduleKind::WarmupCosine => "warmup_cosine",
            ScheduleKind::WarmupLinear => "warmup_linear",
        })
    }
}

impl FromStr for ScheduleKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "warmup_cosine" | "cosine" => Ok(ScheduleKind::WarmupCosine),
            "warmup_linear" | "linear" => Ok(ScheduleKind::WarmupLinear),
            other => Err(format!("unknown schedule {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrSchedule {
    pub kind: ScheduleKind,
    pub total_steps: usize,
    pub warmup_steps: usize,
}

impl LrSchedule {
    /// Warmup covers `ceil(warmup_fraction · total_steps)` steps.
    pub fn new(kind: ScheduleKind, total_steps: usize, warmup_fraction: f64) -> Self {
        let warmup_steps = ((warmup_fraction * total_steps as f64).ceil() as usize).min(total_steps);
        Self {
            kind,
            total_steps,
            warmup_steps,
        }
    }

    /// Multiplier in [0, 1] after `step` completed optimizer steps.
    pub fn multiplier(&self, step: usize) -> f64 {
        let step = step.min(self.total_steps);
        if step < self.warmup_steps {
            return step as f64 / self.warmup_steps as f64;
        }
        let decay_steps = self.total_steps - self.warmup_steps;
        if decay_steps == 0 {
            return if step < self.total_steps { 1.0 } else { 0.0 };
        }
        let progress = (step - self.warmup_steps) as f64 / decay_steps as f64;
        match self.kind {
            ScheduleKind::WarmupCosine => 0.5 * (1.0 + (PI * progress).cos()),
            ScheduleKind::WarmupLinear => 1.0 - progress,
        }
    }
}

/// Warmup + cosine multiplier.
pub fn lr_multiplier(step: usize, total_steps: usize, warmup_fraction: f64) -> f64 {
    LrSchedule::new(ScheduleKind::WarmupCosine, total_steps, warmup_fraction).multiplier(step)
}
