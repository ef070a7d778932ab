//! Records, taxonomy, columnar I/O and stratified splitting.

mod distribution;
mod format;
mod io;
mod labels;
mod record;
mod split;

use thiserror::Error;

pub use distribution::{class_distribution, class_distribution_for, ClassShare, Distribution};
pub use format::{format_input, normalize_whitespace, DEFAULT_SEPARATOR};
pub use io::{
    load_dataset, read_predictions, read_task_predictions, write_dataset, write_predictions,
    write_task_predictions, Schema,
};
pub use labels::{map_evasion_to_clarity, ClarityLabel, EvasionLabel, Task};
pub use record::{assign_sample_weights, Dataset, QAPair, Source};
pub use split::{
    stratified_fold_ids, stratified_kfold, stratified_split, stratified_split_for_task, stratified_split_indices,
    Fold,
};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: malformed row: {message}")]
    Malformed { line: u64, message: String },
    #[error("missing required column `{0}`")]
    MissingColumn(String),
    #[error("unknown {kind} label {value:?}")]
    UnknownLabel { value: String, kind: &'static str },
    #[error("{}hierarchy violation: clarity {clarity:?} cannot have evasion {evasion:?}", row_prefix(*.row))]
    HierarchyViolation {
        row: Option<u64>,
        clarity: ClarityLabel,
        evasion: EvasionLabel,
    },
    #[error("{}invalid record: {reason}", row_prefix(*.row))]
    InvalidRecord { row: Option<u64>, reason: String },
    #[error("record {index} has no label")]
    Unlabeled { index: usize },
    #[error("classes with no records: {0:?}")]
    EmptyClasses(Vec<String>),
    #[error("class {label} has {count} records, fewer than {required}")]
    ClassTooSmall {
        label: String,
        count: usize,
        required: usize,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

fn row_prefix(row: Option<u64>) -> String {
    row.map(|r| format!("line {r}: ")).unwrap_or_default()
}
