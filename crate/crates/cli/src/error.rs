use std::fmt;

use clarity_core::augment::AugmentError;
use clarity_core::baselines::BaselineError;
use clarity_core::config::ConfigError;
use clarity_core::data::DataError;
use clarity_core::eval::EvalError;
use clarity_core::model::ModelError;
use clarity_core::train::TrainError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Usage = 1,
    Data = 2,
    Training = 3,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ExitKind,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            kind: ExitKind::Usage,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self {
            kind: ExitKind::Data,
            message: message.into(),
        }
    }

    pub fn training(message: impl Into<String>) -> Self {
        Self {
            kind: ExitKind::Training,
            message: message.into(),
        }
    }

    pub fn code(&self) -> i32 {
        self.kind as i32
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::usage(format!("config: {e}"))
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::data(e.to_string())
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        CliError::data(e.to_string())
    }
}

impl From<AugmentError> for CliError {
    fn from(e: AugmentError) -> Self {
        CliError::data(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::InvalidConfig(_) => CliError::usage(e.to_string()),
            _ => CliError::training(e.to_string()),
        }
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::InvalidConfig(_) => CliError::usage(e.to_string()),
            TrainError::Data(_) | TrainError::DegenerateValidation { .. } | TrainError::EmptyDataset(_) => {
                CliError::data(e.to_string())
            }
            _ => CliError::training(e.to_string()),
        }
    }
}

impl From<BaselineError> for CliError {
    fn from(e: BaselineError) -> Self {
        match e {
            BaselineError::InvalidConfig(_) | BaselineError::Config(_) => CliError::usage(e.to_string()),
            BaselineError::Data(_) | BaselineError::EmptyTraining | BaselineError::LengthMismatch { .. } => {
                CliError::data(e.to_string())
            }
            BaselineError::Train(t) => t.into(),
            BaselineError::Model(m) => m.into(),
            _ => CliError::training(e.to_string()),
        }
    }
}

pub fn io_error(path: &std::path::Path, e: std::io::Error) -> CliError {
    CliError::data(format!("{}: {e}", path.display()))
}
