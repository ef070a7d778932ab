//! Resolve an encoder identifier to a model.

use std::path::Path;

use super::checkpoint::{load_checkpoint, MANIFEST_FILE};
use super::{ClarityClassifier, ModelConfig, ModelError, TinyEncoder};

/// Hub identifiers the configuration accepts but that need weights fetched
/// from a model hub; loading them offline fails with [`ModelError::Unavailable`].
pub const HUB_IDENTIFIERS: &[&str] = &[
    "roberta-base",
    "roberta-large",
    "bert-base-uncased",
    "distilbert-base-uncased",
    "microsoft/deberta-v3-base",
];

/// `config.encoder_identifier` is either `tiny-random` (fresh weights from
/// `config.init_seed`), a checkpoint directory, or a hub id.
pub fn load_model(config: &ModelConfig) -> Result<ClarityClassifier, ModelError> {
    let id = config.encoder_identifier.as_str();
    if id == TinyEncoder::IDENTIFIER {
        return ClarityClassifier::new_tiny(config.clone());
    }
    let path = Path::new(id);
    if path.join(MANIFEST_FILE).is_file() {
        return load_checkpoint(path);
    }
    if HUB_IDENTIFIERS.contains(&id) || id.contains('/') && !path.exists() {
        return Err(ModelError::Unavailable(id.to_string()));
    }
    Err(ModelError::UnknownIdentifier(id.to_string()))
}
