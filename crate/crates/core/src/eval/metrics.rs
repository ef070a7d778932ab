use serde::{Deserialize, Serialize};

use super::ConfusionMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Precision, recall and F1 per class; any zero denominator yields 0.
pub fn per_class_prf(m: &ConfusionMatrix) -> Vec<ClassMetrics> {
    let rows = m.row_totals();
    let cols = m.col_totals();
    (0..m.k())
        .map(|c| {
            let tp = m.counts[c][c];
            let precision = ratio(tp, cols[c]);
            let recall = ratio(tp, rows[c]);
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            ClassMetrics {
                precision,
                recall,
                f1,
                support: rows[c],
            }
        })
        .collect()
}

/// Unweighted mean of per-class F1 over all K classes, zero-support classes
/// included.
pub fn macro_f1(m: &ConfusionMatrix) -> f64 {
    if m.k() == 0 {
        return 0.0;
    }
    per_class_prf(m).iter().map(|c| c.f1).sum::<f64>() / m.k() as f64
}

pub fn accuracy(m: &ConfusionMatrix) -> f64 {
    ratio(m.trace(), m.total())
}
