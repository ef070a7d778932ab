//! On-disk checkpoints: a directory holding `manifest.txt` (model config as
//! key=value lines) and `weights.json` (named tensors).

use std::fs;
use std::path::Path;

use super::{ClarityClassifier, ModelConfig, ModelError, ParamStore};
use crate::config::KvConfig;

pub const MANIFEST_FILE: &str = "manifest.txt";
pub const WEIGHTS_FILE: &str = "weights.json";
const FORMAT_VERSION: u32 = 1;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ModelError + '_ {
    move |source| ModelError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn save_checkpoint(model: &ClarityClassifier, dir: &Path) -> Result<(), ModelError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut kv = model.config().to_kv();
    kv.set("format_version", FORMAT_VERSION);
    kv.set("num_parameters", model.params().num_scalars());
    let manifest = dir.join(MANIFEST_FILE);
    fs::write(&manifest, kv.to_string()).map_err(io_err(&manifest))?;
    let weights = dir.join(WEIGHTS_FILE);
    let json = serde_json::to_string(model.params()).map_err(|e| ModelError::Checkpoint(e.to_string()))?;
    fs::write(&weights, json).map_err(io_err(&weights))?;
    Ok(())
}

pub fn load_checkpoint(dir: &Path) -> Result<ClarityClassifier, ModelError> {
    let manifest = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&manifest).map_err(io_err(&manifest))?;
    let mut kv = KvConfig::parse(&text)?;
    let version: u32 = kv.parse_or("format_version", 0)?;
    if version != FORMAT_VERSION {
        return Err(ModelError::Checkpoint(format!("unsupported format_version {version}")));
    }
    kv.remove("format_version");
    kv.remove("num_parameters");
    let config = ModelConfig::from_kv(&kv)?;
    let weights = dir.join(WEIGHTS_FILE);
    let json = fs::read_to_string(&weights).map_err(io_err(&weights))?;
    let params: ParamStore = serde_json::from_str(&json).map_err(|e| ModelError::Checkpoint(format!("{}: {e}", weights.display())))?;
    ClarityClassifier::from_params(config, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::QAPair;

    #[test]
    fn round_trip_preserves_logits() {
        let cfg = ModelConfig {
            vocab_size: 50,
            hidden_width: 5,
            feature_width: 3,
            init_seed: 9,
            ..ModelConfig::default()
        };
        let m = ClarityClassifier::new_tiny(cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_checkpoint(&m, dir.path()).unwrap();
        let back = load_checkpoint(dir.path()).unwrap();
        assert_eq!(back.config(), m.config());
        let p = [QAPair::new("1", "Will you?", "Perhaps.").unwrap()];
        assert_eq!(back.forward(&back.encode_pairs(&p)), m.forward(&m.encode_pairs(&p)));
    }

    #[test]
    fn mismatched_weights_are_rejected() {
        let small = ModelConfig {
            vocab_size: 50,
            hidden_width: 5,
            ..ModelConfig::default()
        };
        let m = ClarityClassifier::new_tiny(small.clone()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_checkpoint(&m, dir.path()).unwrap();
        let wider = ModelConfig { hidden_width: 6, ..small };
        let mut kv = wider.to_kv();
        kv.set("format_version", FORMAT_VERSION);
        fs::write(dir.path().join(MANIFEST_FILE), kv.to_string()).unwrap();
        assert!(matches!(load_checkpoint(dir.path()), Err(ModelError::Checkpoint(_))));
    }
}
