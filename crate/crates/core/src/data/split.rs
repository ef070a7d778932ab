//! Stratified hold-out and k-fold splitting.

use rand::seq::SliceRandom;

use super::{DataError, Dataset, Task};
use crate::rng::child_rng;

/// One cross-validation fold.
#[derive(Debug, Clone)]
pub struct Fold {
    pub train: Dataset,
    pub dev: Dataset,
}

/// Indices of each present class, shuffled with a per-class child seed.
fn shuffled_strata(targets: &[usize], seed: u64) -> Vec<(usize, Vec<usize>)> {
    let classes = targets.iter().max().map_or(0, |m| m + 1);
    let mut strata: Vec<Vec<usize>> = vec![Vec::new(); classes];
    for (i, &t) in targets.iter().enumerate() {
        strata[t].push(i);
    }
    strata
        .into_iter()
        .enumerate()
        .filter(|(_, idx)| !idx.is_empty())
        .map(|(c, mut idx)| {
            idx.shuffle(&mut child_rng(seed, &[c as u64]));
            (c, idx)
        })
        .collect()
}

/// Dev quota per class: floor of the proportional share, then the leftover
/// needed to reach round(N·fraction) goes to the largest remainders (ties by
/// class code).
fn dev_quotas(sizes: &[usize], fraction: f64) -> Vec<usize> {
    let total: usize = sizes.iter().sum();
    let target = (total as f64 * fraction).round() as usize;
    let exact: Vec<f64> = sizes.iter().map(|&n| n as f64 * fraction).collect();
    let mut quotas: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    let mut missing = target.saturating_sub(quotas.iter().sum());
    for &c in order.iter().cycle().take(sizes.len() * 2) {
        if missing == 0 {
            break;
        }
        if quotas[c] < sizes[c] {
            quotas[c] += 1;
            missing -= 1;
        }
    }
    quotas
}

/// Train and dev index sets, each in ascending (file) order.
pub fn stratified_split_indices(
    d: &Dataset,
    task: Task,
    dev_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>), DataError> {
    if !(dev_fraction > 0.0 && dev_fraction < 1.0) {
        return Err(DataError::InvalidArgument(format!(
            "dev fraction {dev_fraction} outside (0, 1)"
        )));
    }
    let strata = shuffled_strata(&d.targets(task)?, seed);
    let sizes: Vec<usize> = strata.iter().map(|(_, idx)| idx.len()).collect();
    let quotas = dev_quotas(&sizes, dev_fraction);
    let mut train = Vec::with_capacity(d.len());
    let mut dev = Vec::new();
    for ((_, idx), q) in strata.iter().zip(quotas) {
        dev.extend_from_slice(&idx[..q]);
        train.extend_from_slice(&idx[q..]);
    }
    train.sort_unstable();
    dev.sort_unstable();
    Ok((train, dev))
}

/// Clarity-stratified hold-out split.
pub fn stratified_split(
    d: &Dataset,
    dev_fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset), DataError> {
    stratified_split_for_task(d, Task::Clarity, dev_fraction, seed, &[])
}

/// Stratified split on `task` labels. Every class code in `required` must
/// have at least one record.
pub fn stratified_split_for_task(
    d: &Dataset,
    task: Task,
    dev_fraction: f64,
    seed: u64,
    required: &[usize],
) -> Result<(Dataset, Dataset), DataError> {
    let targets = d.targets(task)?;
    let empty: Vec<String> = required
        .iter()
        .filter(|&&c| !targets.contains(&c))
        .map(|&c| task.label_name(c).unwrap_or("?").to_string())
        .collect();
    if !empty.is_empty() {
        return Err(DataError::EmptyClasses(empty));
    }
    let (train, dev) = stratified_split_indices(d, task, dev_fraction, seed)?;
    Ok((
        d.select(format!("{}-train", d.name), &train),
        d.select(format!("{}-dev", d.name), &dev),
    ))
}

/// Fold index of every target: members of each class are dealt round-robin
/// across folds, continuing the rotation from class to class so fold sizes
/// also stay within one of each other. Errors name the first class (by
/// code) with fewer than `k` members.
pub fn stratified_fold_ids(targets: &[usize], k: usize, seed: u64) -> Result<Vec<usize>, (usize, usize)> {
    let strata = shuffled_strata(targets, seed);
    if let Some((c, idx)) = strata.iter().find(|(_, idx)| idx.len() < k) {
        return Err((*c, idx.len()));
    }
    let mut fold_of = vec![0usize; targets.len()];
    let mut offset = 0;
    for (_, idx) in &strata {
        for (j, &i) in idx.iter().enumerate() {
            fold_of[i] = (offset + j) % k;
        }
        offset += idx.len();
    }
    Ok(fold_of)
}

/// Stratified k-fold over `task` labels.
pub fn stratified_kfold(d: &Dataset, task: Task, k: usize, seed: u64) -> Result<Vec<Fold>, DataError> {
    if k < 2 {
        return Err(DataError::InvalidArgument(format!("k = {k}, need k >= 2")));
    }
    let fold_of = stratified_fold_ids(&d.targets(task)?, k, seed).map_err(|(c, count)| DataError::ClassTooSmall {
        label: task.label_name(c).unwrap_or("?").to_string(),
        count,
        required: k,
    })?;
    Ok((0..k)
        .map(|f| {
            let (dev, train): (Vec<usize>, Vec<usize>) = (0..d.len()).partition(|&i| fold_of[i] == f);
            Fold {
                train: d.select(format!("{}-fold{f}-train", d.name), &train),
                dev: d.select(format!("{}-fold{f}-dev", d.name), &dev),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{ClarityLabel, QAPair};
    use std::collections::BTreeSet;

    fn labeled(counts: &[(ClarityLabel, usize)]) -> Dataset {
        let mut records = Vec::new();
        for &(l, k) in counts {
            for i in 0..k {
                records.push(
                    QAPair::new(format!("{}-{i}", l.code()), "Q?", "A.")
                        .unwrap()
                        .with_clarity(l)
                        .unwrap(),
                );
            }
        }
        Dataset::new("t", records)
    }

    fn reference() -> Dataset {
        labeled(&[
            (ClarityLabel::Ambivalent, 2040),
            (ClarityLabel::ClearReply, 1052),
            (ClarityLabel::ClearNonReply, 356),
        ])
    }

    fn count(d: &Dataset, l: ClarityLabel) -> usize {
        d.iter().filter(|r| r.clarity == Some(l)).count()
    }

    #[test]
    fn reference_split_sizes() {
        let d = reference();
        let (train, dev) = stratified_split(&d, 0.2, 42).unwrap();
        assert_eq!((train.len(), dev.len()), (2758, 690));
        for (l, n) in [
            (ClarityLabel::Ambivalent, 2040usize),
            (ClarityLabel::ClearReply, 1052),
            (ClarityLabel::ClearNonReply, 356),
        ] {
            let expected = (n as f64 * 0.2).round() as i64;
            assert!((count(&dev, l) as i64 - expected).abs() <= 1);
        }
    }

    #[test]
    fn single_class_split() {
        let d = labeled(&[(ClarityLabel::ClearReply, 10)]);
        let (train, dev) = stratified_split(&d, 0.2, 1).unwrap();
        assert_eq!((train.len(), dev.len()), (8, 2));
    }

    #[test]
    fn partition_and_determinism() {
        let d = reference();
        let (t1, d1) = stratified_split_indices(&d, Task::Clarity, 0.2, 9).unwrap();
        let (t2, d2) = stratified_split_indices(&d, Task::Clarity, 0.2, 9).unwrap();
        assert_eq!((&t1, &d1), (&t2, &d2));
        let a: BTreeSet<usize> = t1.iter().copied().collect();
        let b: BTreeSet<usize> = d1.iter().copied().collect();
        assert!(a.is_disjoint(&b));
        assert_eq!(a.len() + b.len(), d.len());
        let (_, d3) = stratified_split_indices(&d, Task::Clarity, 0.2, 10).unwrap();
        assert_ne!(d1, d3);
    }

    #[test]
    fn required_empty_class_is_named() {
        let d = labeled(&[(ClarityLabel::ClearReply, 10)]);
        let err = stratified_split_for_task(&d, Task::Clarity, 0.2, 1, &[0, 1, 2]).unwrap_err();
        match err {
            DataError::EmptyClasses(names) => {
                assert_eq!(names, vec!["Ambivalent".to_string(), "Clear Non-Reply".to_string()])
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_fraction_rejected() {
        let d = labeled(&[(ClarityLabel::ClearReply, 10)]);
        assert!(stratified_split(&d, 0.0, 1).is_err());
        assert!(stratified_split(&d, 1.0, 1).is_err());
    }

    #[test]
    fn kfold_balanced_partition() {
        let d = labeled(&[
            (ClarityLabel::ClearReply, 34),
            (ClarityLabel::Ambivalent, 33),
            (ClarityLabel::ClearNonReply, 33),
        ]);
        let folds = stratified_kfold(&d, Task::Clarity, 5, 3).unwrap();
        assert_eq!(folds.len(), 5);
        let mut seen = BTreeSet::new();
        for f in &folds {
            assert_eq!(f.train.len() + f.dev.len(), 100);
            assert_eq!(f.dev.len(), 20);
            for r in &f.dev {
                assert!(seen.insert(r.id.clone()), "{} in two dev folds", r.id);
            }
        }
        assert_eq!(seen.len(), 100);
        // Counting oracle: each class's dev counts differ by at most one.
        for l in ClarityLabel::ALL {
            let per_fold: Vec<usize> = folds.iter().map(|f| count(&f.dev, l)).collect();
            let (lo, hi) = (per_fold.iter().min().unwrap(), per_fold.iter().max().unwrap());
            assert!(hi - lo <= 1, "{l:?}: {per_fold:?}");
        }
    }

    #[test]
    fn kfold_small_class_named() {
        let d = labeled(&[(ClarityLabel::ClearReply, 10), (ClarityLabel::ClearNonReply, 2)]);
        let err = stratified_kfold(&d, Task::Clarity, 3, 0).unwrap_err();
        assert!(err.to_string().contains("Clear Non-Reply"), "{err}");
    }
}
