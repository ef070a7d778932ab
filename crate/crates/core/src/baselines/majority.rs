use super::BaselineError;

/// Most frequent label; ties go to the smaller code.
pub fn majority_class(train_labels: &[usize]) -> Result<usize, BaselineError> {
    if train_labels.is_empty() {
        return Err(BaselineError::EmptyTraining);
    }
    let k = train_labels.iter().max().unwrap() + 1;
    let mut counts = vec![0usize; k];
    for &y in train_labels {
        counts[y] += 1;
    }
    // max_by_key keeps the last maximum, so scan in reverse.
    Ok((0..k).rev().max_by_key(|&c| counts[c]).unwrap())
}

/// Predict the training majority for each of `n_test` records.
pub fn majority_baseline(train_labels: &[usize], n_test: usize) -> Result<Vec<usize>, BaselineError> {
    let c = majority_class(train_labels)?;
    Ok(vec![c; n_test])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{confusion_matrix, macro_f1};

    #[test]
    fn reference_distribution_predicts_ambivalent() {
        let mut train = vec![1usize; 2040];
        train.extend(vec![0; 1052]);
        train.extend(vec![2; 356]);
        assert_eq!(majority_class(&train).unwrap(), 1);
    }

    #[test]
    fn macro_f1_on_test_distribution() {
        // 79 clear replies, 206 ambivalent, 23 clear non-replies
        let mut truth = vec![0usize; 79];
        truth.extend(vec![1; 206]);
        truth.extend(vec![2; 23]);
        let preds = majority_baseline(&[1, 1, 0], truth.len()).unwrap();
        let names = vec!["a".into(), "b".into(), "c".into()];
        let f1 = macro_f1(&confusion_matrix(&truth, &preds, names).unwrap());
        let p = 206.0 / 308.0;
        let expected = 2.0 * p / (p + 1.0) / 3.0;
        assert!((f1 - expected).abs() < 1e-12);
        assert!((f1 - 0.2672).abs() < 5e-5);
    }

    #[test]
    fn ties_and_degenerate_inputs() {
        assert_eq!(majority_class(&[2, 0, 2, 0]).unwrap(), 0);
        assert_eq!(majority_baseline(&[2], 3).unwrap(), vec![2, 2, 2]);
        assert!(matches!(majority_class(&[]), Err(BaselineError::EmptyTraining)));
    }
}
