//! Class- and sample-weighted focal loss.

use ndarray::{Array1, Array2, ArrayView1};

use super::TrainError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reduction {
    /// `Σ wᵢ·lᵢ / Σ wᵢ`
    #[default]
    WeightedMean,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FocalLoss {
    pub gamma: f64,
    pub class_weights: Vec<f64>,
    pub reduction: Reduction,
}

/// `N / (K · n_c)` per class, so `Σ α_c · n_c = N`.
pub fn inverse_frequency_weights(counts: &[usize]) -> Result<Vec<f64>, TrainError> {
    if let Some(c) = counts.iter().position(|&n| n == 0) {
        return Err(TrainError::EmptyClass(c));
    }
    let total: usize = counts.iter().sum();
    let k = counts.len() as f64;
    Ok(counts.iter().map(|&n| total as f64 / (k * n as f64)).collect())
}

fn log_sum_exp(z: ArrayView1<'_, f64>) -> f64 {
    let max = z.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    max + z.iter().map(|&v| (v - max).exp()).sum::<f64>().ln()
}

impl FocalLoss {
    pub fn new(gamma: f64, class_weights: Vec<f64>) -> Result<Self, TrainError> {
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(TrainError::InvalidConfig(format!("gamma {gamma} must be finite and >= 0")));
        }
        if class_weights.is_empty() || class_weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(TrainError::InvalidConfig(format!("class weights {class_weights:?} must be finite and positive")));
        }
        Ok(Self {
            gamma,
            class_weights,
            reduction: Reduction::WeightedMean,
        })
    }

    /// All class weights 1.
    pub fn unweighted(num_classes: usize, gamma: f64) -> Self {
        Self::new(gamma, vec![1.0; num_classes]).expect("valid")
    }

    pub fn num_classes(&self) -> usize {
        self.class_weights.len()
    }

    /// Loss of one sample and its gradient with respect to the logits.
    pub fn sample(&self, logits: ArrayView1<'_, f64>, target: usize) -> (f64, Array1<f64>) {
        let alpha = self.class_weights[target];
        let lse = log_sum_exp(logits);
        let log_p = logits[target] - lse;
        let p = log_p.exp();
        // 1 - p without cancellation when p ≈ 1.
        let q = -log_p.exp_m1();
        let modulator = if self.gamma == 0.0 { 1.0 } else { q.powf(self.gamma) };
        let loss = alpha * modulator * -log_p;
        // d loss / d log p
        let g = if self.gamma == 0.0 {
            -alpha
        } else if q == 0.0 {
            0.0
        } else {
            alpha * (self.gamma * q.powf(self.gamma - 1.0) * p * log_p - modulator)
        };
        let mut grad = logits.mapv(|z| -(z - lse).exp() * g);
        grad[target] += g;
        (loss, grad)
    }

    fn check(&self, logits: &Array2<f64>, targets: &[usize], weights: &[f64]) -> Result<(), TrainError> {
        let (b, k) = logits.dim();
        if k != self.num_classes() || targets.len() != b || weights.len() != b {
            return Err(TrainError::Shape(format!(
                "logits {b}x{k}, {} targets, {} weights, {} classes",
                targets.len(),
                weights.len(),
                self.num_classes()
            )));
        }
        if logits.iter().any(|v| !v.is_finite()) {
            return Err(TrainError::NonFiniteLogits);
        }
        if let Some(&t) = targets.iter().find(|&&t| t >= k) {
            return Err(TrainError::Shape(format!("target {t} out of range for {k} classes")));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(TrainError::Shape(format!("sample weight {w} must be positive")));
        }
        Ok(())
    }

    /// Reduced loss.
    pub fn loss(&self, logits: &Array2<f64>, targets: &[usize], weights: &[f64]) -> Result<f64, TrainError> {
        self.loss_and_grad(logits, targets, weights).map(|(l, _)| l)
    }

    /// Reduced loss and its gradient with respect to every logit.
    pub fn loss_and_grad(&self, logits: &Array2<f64>, targets: &[usize], weights: &[f64]) -> Result<(f64, Array2<f64>), TrainError> {
        self.check(logits, targets, weights)?;
        let total_weight: f64 = weights.iter().sum();
        let mut grad = Array2::zeros(logits.dim());
        let mut loss = 0.0;
        for (b, row) in logits.rows().into_iter().enumerate() {
            let (l, g) = self.sample(row, targets[b]);
            loss += weights[b] * l;
            grad.row_mut(b).assign(&(g * (weights[b] / total_weight)));
        }
        Ok((loss / total_weight, grad))
    }
}
