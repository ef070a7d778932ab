use std::collections::BTreeMap;

use super::{ClarityLabel, DataError, Dataset, Task};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassShare {
    pub count: usize,
    pub fraction: f64,
}

/// Per-class counts and fractions, keyed by class code.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    pub task: Task,
    pub shares: Vec<ClassShare>,
}

impl Distribution {
    pub fn from_counts(task: Task, counts: &[usize]) -> Self {
        let total: usize = counts.iter().sum();
        let shares = counts
            .iter()
            .map(|&count| ClassShare {
                count,
                fraction: if total == 0 {
                    0.0
                } else {
                    count as f64 / total as f64
                },
            })
            .collect();
        Self { task, shares }
    }

    pub fn counts(&self) -> Vec<usize> {
        self.shares.iter().map(|s| s.count).collect()
    }

    pub fn total(&self) -> usize {
        self.shares.iter().map(|s| s.count).sum()
    }

    pub fn get(&self, label: ClarityLabel) -> ClassShare {
        self.shares[label.code()]
    }

    /// Clarity view as an ordered map.
    pub fn by_clarity(&self) -> BTreeMap<ClarityLabel, ClassShare> {
        ClarityLabel::ALL
            .iter()
            .filter_map(|&l| self.shares.get(l.code()).map(|s| (l, *s)))
            .collect()
    }
}

/// Clarity distribution; every record must carry a clarity label.
pub fn class_distribution(d: &Dataset) -> Result<Distribution, DataError> {
    class_distribution_for(d, Task::Clarity)
}

pub fn class_distribution_for(d: &Dataset, task: Task) -> Result<Distribution, DataError> {
    let mut counts = vec![0usize; task.num_classes()];
    for t in d.targets(task)? {
        counts[t] += 1;
    }
    Ok(Distribution::from_counts(task, &counts))
}
