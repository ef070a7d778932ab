use std::fmt;
use std::str::FromStr;

use super::forest::{ForestConfig, RandomForest};
use super::logreg::{LogRegConfig, LogisticRegression};
use super::svm::{svm_grid_search, SvmConfig, SvmModel};
use super::{BaselineError, SparseMatrix};

/// The sorted set of labels seen in training; models work on positions in it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelIndex {
    classes: Vec<usize>,
}

impl LabelIndex {
    pub fn fit(labels: &[usize]) -> Result<Self, BaselineError> {
        let mut classes = labels.to_vec();
        classes.sort_unstable();
        classes.dedup();
        match classes.len() {
            0 => Err(BaselineError::EmptyTraining),
            1 => Err(BaselineError::SingleClass(classes[0])),
            _ => Ok(Self { classes }),
        }
    }

    pub fn classes(&self) -> &[usize] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn encode(&self, labels: &[usize]) -> Vec<usize> {
        labels
            .iter()
            .map(|y| self.classes.binary_search(y).expect("label seen in training"))
            .collect()
    }

    pub fn decode(&self, position: usize) -> usize {
        self.classes[position]
    }
}

/// `n / (k · n_c)` for each of the `k` classes present, indexed by position.
pub fn balanced_class_weights(encoded: &[usize], k: usize) -> Vec<f64> {
    let mut counts = vec![0usize; k];
    for &y in encoded {
        counts[y] += 1;
    }
    counts
        .iter()
        .map(|&c| if c == 0 { 0.0 } else { encoded.len() as f64 / (k as f64 * c as f64) })
        .collect()
}

pub(crate) fn check_aligned(x: &SparseMatrix, labels: &[usize]) -> Result<(), BaselineError> {
    if x.n_rows() != labels.len() {
        return Err(BaselineError::LengthMismatch {
            features: x.n_rows(),
            labels: labels.len(),
        });
    }
    if labels.is_empty() {
        return Err(BaselineError::EmptyTraining);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassicalKind {
    LogReg,
    Svm,
    RandomForest,
}

impl fmt::Display for ClassicalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassicalKind::LogReg => "logreg",
            ClassicalKind::Svm => "svm",
            ClassicalKind::RandomForest => "random_forest",
        })
    }
}

impl FromStr for ClassicalKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "logreg" | "lr" | "logistic_regression" => Ok(Self::LogReg),
            "svm" => Ok(Self::Svm),
            "random_forest" | "rf" | "forest" => Ok(Self::RandomForest),
            other => Err(format!("unknown classical model {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClassicalConfig {
    pub logreg: LogRegConfig,
    pub svm: SvmConfig,
    pub forest: ForestConfig,
}

#[derive(Debug, Clone)]
pub enum ClassicalModel {
    LogReg(LogisticRegression),
    Svm(SvmModel),
    RandomForest(RandomForest),
}

impl ClassicalModel {
    pub fn predict(&self, x: &SparseMatrix) -> Vec<usize> {
        match self {
            ClassicalModel::LogReg(m) => m.predict(x),
            ClassicalModel::Svm(m) => m.predict(x),
            ClassicalModel::RandomForest(m) => m.predict(x),
        }
    }

    /// One-line description of the fitted configuration.
    pub fn describe(&self) -> String {
        match self {
            ClassicalModel::LogReg(m) => format!("logreg C={}", m.config().c),
            ClassicalModel::Svm(m) => format!("svm kernel={} C={}", m.kernel(), m.c()),
            ClassicalModel::RandomForest(m) => format!("random_forest trees={}", m.n_trees()),
        }
    }
}

/// Fit one classical model. The SVM runs its cross-validated grid first and
/// refits the winning cell on all of `x`.
pub fn train_classical(
    kind: ClassicalKind,
    x: &SparseMatrix,
    labels: &[usize],
    cfg: &ClassicalConfig,
) -> Result<ClassicalModel, BaselineError> {
    Ok(match kind {
        ClassicalKind::LogReg => ClassicalModel::LogReg(LogisticRegression::fit(x, labels, &cfg.logreg)?),
        ClassicalKind::Svm => ClassicalModel::Svm(svm_grid_search(x, labels, &cfg.svm)?.model),
        ClassicalKind::RandomForest => ClassicalModel::RandomForest(RandomForest::fit(x, labels, &cfg.forest)?),
    })
}
