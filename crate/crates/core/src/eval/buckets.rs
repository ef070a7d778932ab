use std::collections::BTreeMap;

use crate::data::{ClarityLabel, QAPair};

/// A predicted label with an optional model confidence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredPrediction {
    pub label: ClarityLabel,
    pub confidence: Option<f64>,
}

impl From<ClarityLabel> for ScoredPrediction {
    fn from(label: ClarityLabel) -> Self {
        Self {
            label,
            confidence: None,
        }
    }
}

/// Misclassified records keyed by `(true, predicted)`.
pub type ErrorBuckets = BTreeMap<(ClarityLabel, ClarityLabel), Vec<QAPair>>;

/// Group off-diagonal pairs by `(true, predicted)`. A bucket whose members
/// all carry a confidence is sorted by confidence, highest first; otherwise
/// it keeps input order. Unlabeled records are skipped.
pub fn error_buckets(pairs: &[(QAPair, ScoredPrediction)]) -> ErrorBuckets {
    let mut scored: BTreeMap<(ClarityLabel, ClarityLabel), Vec<(Option<f64>, &QAPair)>> =
        BTreeMap::new();
    for (p, pred) in pairs {
        let Some(truth) = p.clarity else { continue };
        if truth != pred.label {
            scored
                .entry((truth, pred.label))
                .or_default()
                .push((pred.confidence, p));
        }
    }
    scored
        .into_iter()
        .map(|(key, mut items)| {
            if items.iter().all(|(c, _)| c.is_some()) {
                items.sort_by(|a, b| b.0.unwrap().total_cmp(&a.0.unwrap()));
            }
            (key, items.into_iter().map(|(_, p)| p.clone()).collect())
        })
        .collect()
}
