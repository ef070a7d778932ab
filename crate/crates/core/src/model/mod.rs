//! Encoder backbone, feature-fusion head and checkpoints.

mod checkpoint;
mod classifier;
mod config;
mod encoder;
mod head;
mod params;
mod registry;
mod tokenizer;

pub use checkpoint::{load_checkpoint, save_checkpoint, MANIFEST_FILE, WEIGHTS_FILE};
pub use classifier::{argmax, ClarityClassifier, ModelBatch, SampleCache};
pub use config::{ModelConfig, Pooling};
pub use encoder::{EncoderBackbone, TinyCache, TinyEncoder, TinyEncoderConfig, TokenBatch};
pub use head::{FusionHead, HeadCache, FEATURE_INPUTS};
pub use params::{ParamId, ParamStore, ParamTensor};
pub use registry::{load_model, HUB_IDENTIFIERS};
pub use tokenizer::{split_tokens, Encoded, HashTokenizer, CLS_ID, PAD_ID, SEP_ID, SPECIAL_TOKENS, UNK_ID};

use std::path::PathBuf;

use crate::config::ConfigError;

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("invalid model configuration: {0}")]
    InvalidConfig(String),
    #[error("encoder {0:?} needs downloaded weights, which are not available offline; use \"tiny-random\" or a checkpoint directory")]
    Unavailable(String),
    #[error("unknown encoder identifier {0:?}")]
    UnknownIdentifier(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("bad checkpoint: {0}")]
    Checkpoint(String),
}

impl From<ConfigError> for ModelError {
    fn from(e: ConfigError) -> Self {
        ModelError::InvalidConfig(e.to_string())
    }
}
