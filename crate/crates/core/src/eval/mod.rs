//! Confusion matrices, per-class and macro metrics, reports, error buckets.

mod buckets;
mod confusion;
mod metrics;
mod report;

use thiserror::Error;

pub use buckets::{error_buckets, ErrorBuckets, ScoredPrediction};
pub use confusion::{confusion_matrix, ConfusionMatrix};
pub use metrics::{accuracy, macro_f1, per_class_prf, ClassMetrics};
pub use report::{read_matrix, render_metrics_file, render_report, write_matrix, ReportFormat};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("length mismatch: {truths} truths vs {preds} predictions")]
    LengthMismatch { truths: usize, preds: usize },
    #[error("label {label} out of range for {k} classes")]
    OutOfRange { label: usize, k: usize },
    #[error("malformed matrix file: {0}")]
    MalformedMatrix(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
