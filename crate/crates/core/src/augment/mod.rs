//! Minority-class augmentation: lexical paraphrases and frame × context
//! synthesis, stamped with per-source confidence weights.

mod casa;
mod client;
mod eda;
mod frames;
mod lint;
mod plan;
mod resources;

use std::path::PathBuf;

pub use casa::{casa_draft, casa_generate, CasaDraft, CONTEXT_SLOT};
pub use client::{
    extract_text, ClientError, GeneratorClient, GeneratorSettings, HttpGeneratorClient, API_KEY_ENV, ENDPOINT_ENV,
};
pub use eda::{
    eda_augment, max_changes, random_delete, random_insert, random_swap, synonym_replace, tokenize, EdaOp,
};
pub use frames::{clause_frame, extract_frames, whole_answer_frames, RhetoricalFrame, ENTITY_SLOT, TOPIC_SLOT};
pub use lint::{lint_synthetic, LintBounds, LintIssue, LintReport};
pub use plan::{balance_plan, run_plan, AugmentationPlan, BalanceMode, TrainingSplit};
pub use resources::{list_lines, AugmentResources, Thesaurus};

pub use crate::data::assign_sample_weights;

use crate::data::{ClarityLabel, DataError};

#[derive(Debug, thiserror::Error)]
pub enum AugmentError {
    #[error("invalid augmentation plan: {0}")]
    InvalidPlan(String),
    #[error("target {target} for {label} is below its current count {current}")]
    TargetBelowCurrent {
        label: ClarityLabel,
        target: usize,
        current: usize,
    },
    #[error("no frames to generate from")]
    NoFrames,
    #[error("no original {0} records to augment from")]
    NoSeedRecords(ClarityLabel),
    #[error("record {id} belongs to held-out split {split:?}; augmentation only reads training data")]
    HeldOut { id: String, split: String },
    #[error("resource error: {0}")]
    Resource(String),
    #[error(transparent)]
    Client(#[from] ClientError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
