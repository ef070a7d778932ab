//! Reference models for comparison tables: majority class, TF-IDF features
//! with logistic regression, kernel SVM and random forest, and plain
//! transformer fine-tuning.

mod classical;
mod forest;
mod harness;
mod logreg;
mod majority;
mod svm;
mod tfidf;
mod transformer;

use thiserror::Error;

pub use classical::{balanced_class_weights, train_classical, ClassicalConfig, ClassicalKind, ClassicalModel, LabelIndex};
pub use forest::{ForestConfig, RandomForest};
pub use harness::{
    render_comparison, run_baseline, BaselineKind, BaselineRun, BaselineSettings, ComparisonRow, INPUT_SEPARATOR,
    REFERENCE_SCORES,
};
pub use logreg::{LogRegConfig, LogisticRegression};
pub use majority::{majority_baseline, majority_class};
pub use svm::{svm_grid_search, Kernel, SvmCell, SvmConfig, SvmGridResult, SvmModel};
pub use tfidf::{english_stopwords, tfidf_vectorize, word_tokens, SparseMatrix, TfidfConfig, TfidfVectorizer};
pub use transformer::{simple_transformer_baseline, simple_transformer_config, TransformerBaseline, TransformerKind};

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("invalid baseline config: {0}")]
    InvalidConfig(String),
    #[error("training set is empty")]
    EmptyTraining,
    #[error("vocabulary is empty after document-frequency filtering")]
    EmptyVocabulary,
    #[error("training labels contain a single class ({0}); nothing to discriminate")]
    SingleClass(usize),
    #[error("{features} feature rows but {labels} labels")]
    LengthMismatch { features: usize, labels: usize },
    #[error("optimizer failed: {0}")]
    Optimizer(String),
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error(transparent)]
    Data(#[from] crate::data::DataError),
    #[error(transparent)]
    Train(#[from] crate::train::TrainError),
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
    #[error(transparent)]
    Eval(#[from] crate::eval::EvalError),
}
