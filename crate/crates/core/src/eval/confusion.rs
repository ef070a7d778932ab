use serde::{Deserialize, Serialize};

use super::EvalError;

/// K×K counts; rows are true labels, columns are predictions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<u64>>,
    pub label_names: Vec<String>,
}

impl ConfusionMatrix {
    pub fn zeros(label_names: Vec<String>) -> Self {
        let k = label_names.len();
        Self {
            counts: vec![vec![0; k]; k],
            label_names,
        }
    }

    pub fn from_counts(counts: Vec<Vec<u64>>, label_names: Vec<String>) -> Result<Self, EvalError> {
        let k = label_names.len();
        if counts.len() != k || counts.iter().any(|r| r.len() != k) {
            return Err(EvalError::MalformedMatrix(format!(
                "expected {k}x{k} counts"
            )));
        }
        Ok(Self { counts, label_names })
    }

    pub fn k(&self) -> usize {
        self.label_names.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn row_totals(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_totals(&self) -> Vec<u64> {
        (0..self.k())
            .map(|c| self.counts.iter().map(|r| r[c]).sum())
            .collect()
    }

    pub fn trace(&self) -> u64 {
        (0..self.k()).map(|i| self.counts[i][i]).sum()
    }

    pub fn errors(&self) -> u64 {
        self.total() - self.trace()
    }

    /// Share of all errors that fall in the two cells `(a, b)` and `(b, a)`.
    pub fn pair_error_share(&self, a: usize, b: usize) -> f64 {
        let errors = self.errors();
        if errors == 0 {
            return 0.0;
        }
        (self.counts[a][b] + self.counts[b][a]) as f64 / errors as f64
    }

    /// Same matrix with classes listed in `order` (a permutation of codes).
    pub fn reordered(&self, order: &[usize]) -> Self {
        Self {
            counts: order
                .iter()
                .map(|&r| order.iter().map(|&c| self.counts[r][c]).collect())
                .collect(),
            label_names: order.iter().map(|&i| self.label_names[i].clone()).collect(),
        }
    }

    pub fn add(&mut self, truth: usize, pred: usize) -> Result<(), EvalError> {
        let k = self.k();
        for label in [truth, pred] {
            if label >= k {
                return Err(EvalError::OutOfRange { label, k });
            }
        }
        self.counts[truth][pred] += 1;
        Ok(())
    }
}

/// Tally `(truth, prediction)` pairs.
pub fn confusion_matrix(
    truths: &[usize],
    preds: &[usize],
    label_names: Vec<String>,
) -> Result<ConfusionMatrix, EvalError> {
    if truths.len() != preds.len() {
        return Err(EvalError::LengthMismatch {
            truths: truths.len(),
            preds: preds.len(),
        });
    }
    let mut m = ConfusionMatrix::zeros(label_names);
    for (&t, &p) in truths.iter().zip(preds) {
        m.add(t, p)?;
    }
    Ok(m)
}
