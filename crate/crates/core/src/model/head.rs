//! Feature-fusion classification head.
//!
//! `logits = W꜀ · [pooled ; dropout(relu(W_f · features + b_f))] + b꜀`

use ndarray::{Array1, ArrayView1, Axis};
use rand::Rng;

use super::params::{ParamId, ParamStore};

#[derive(Debug, Clone)]
pub struct FusionHead {
    hidden_width: usize,
    feature_width: usize,
    num_classes: usize,
    dropout: f64,
    feature_weight: Option<ParamId>,
    feature_bias: Option<ParamId>,
    classifier_weight: ParamId,
    classifier_bias: ParamId,
}

/// Intermediates of one head evaluation.
#[derive(Debug, Clone)]
pub struct HeadCache {
    features: [f64; 2],
    pre_activation: Array1<f64>,
    /// Inverted-dropout multipliers (0 or 1/(1-r)); all ones in eval mode.
    keep: Array1<f64>,
    fused: Array1<f64>,
}

pub const FEATURE_INPUTS: usize = 2;

impl FusionHead {
    /// `feature_width == 0` disables the boolean-feature branch.
    pub fn new<R: Rng>(
        hidden_width: usize,
        feature_width: usize,
        num_classes: usize,
        dropout: f64,
        store: &mut ParamStore,
        rng: &mut R,
    ) -> Self {
        let (feature_weight, feature_bias) = if feature_width > 0 {
            (
                Some(store.push_normal("head.feature.weight", vec![feature_width, FEATURE_INPUTS], Some(0), 0.5, rng)),
                Some(store.push_zeros("head.feature.bias", vec![feature_width], Some(0))),
            )
        } else {
            (None, None)
        };
        let fused = hidden_width + feature_width;
        let classifier_weight = store.push_normal(
            "head.classifier.weight",
            vec![num_classes, fused],
            Some(0),
            1.0 / (fused as f64).sqrt(),
            rng,
        );
        let classifier_bias = store.push_zeros("head.classifier.bias", vec![num_classes], Some(0));
        Self {
            hidden_width,
            feature_width,
            num_classes,
            dropout,
            feature_weight,
            feature_bias,
            classifier_weight,
            classifier_bias,
        }
    }

    pub fn attach(hidden_width: usize, feature_width: usize, num_classes: usize, dropout: f64, store: &ParamStore) -> Option<Self> {
        let (feature_weight, feature_bias) = if feature_width > 0 {
            (Some(store.find("head.feature.weight")?), Some(store.find("head.feature.bias")?))
        } else {
            (None, None)
        };
        Some(Self {
            hidden_width,
            feature_width,
            num_classes,
            dropout,
            feature_weight,
            feature_bias,
            classifier_weight: store.find("head.classifier.weight")?,
            classifier_bias: store.find("head.classifier.bias")?,
        })
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn feature_weight(&self) -> Option<ParamId> {
        self.feature_weight
    }

    pub fn feature_bias(&self) -> Option<ParamId> {
        self.feature_bias
    }

    pub fn classifier_weight(&self) -> ParamId {
        self.classifier_weight
    }

    pub fn classifier_bias(&self) -> ParamId {
        self.classifier_bias
    }

    /// Logits for one pooled vector. `dropout_rng` is `Some` only in training.
    pub fn forward<R: Rng>(
        &self,
        params: &ParamStore,
        pooled: ArrayView1<'_, f64>,
        features: [f64; 2],
        dropout_rng: Option<&mut R>,
    ) -> (Array1<f64>, HeadCache) {
        debug_assert_eq!(pooled.len(), self.hidden_width);
        let f = self.feature_width;
        let (pre, keep, projected) = match (self.feature_weight, self.feature_bias) {
            (Some(w), Some(b)) => {
                let x = ArrayView1::from(&features[..]);
                let pre = params.matrix(w).dot(&x) + params.vector(b);
                let keep = match dropout_rng {
                    Some(rng) if self.dropout > 0.0 => {
                        let scale = 1.0 / (1.0 - self.dropout);
                        Array1::from_shape_fn(f, |_| if rng.gen::<f64>() < self.dropout { 0.0 } else { scale })
                    }
                    _ => Array1::ones(f),
                };
                let projected = pre.mapv(|v| v.max(0.0)) * &keep;
                (pre, keep, projected)
            }
            _ => (Array1::zeros(0), Array1::zeros(0), Array1::zeros(0)),
        };
        let fused = ndarray::concatenate(Axis(0), &[pooled, projected.view()]).expect("1-d concat");
        let logits = params.matrix(self.classifier_weight).dot(&fused) + params.vector(self.classifier_bias);
        (
            logits,
            HeadCache {
                features,
                pre_activation: pre,
                keep,
                fused,
            },
        )
    }

    /// Accumulate head gradients; returns d(loss)/d(pooled).
    pub fn backward(&self, params: &ParamStore, cache: &HeadCache, d_logits: ArrayView1<'_, f64>, grads: &mut ParamStore) -> Array1<f64> {
        {
            let mut g = grads.matrix_mut(self.classifier_weight);
            let outer = d_logits
                .insert_axis(Axis(1))
                .dot(&cache.fused.view().insert_axis(Axis(0)));
            g += &outer;
        }
        {
            let mut g = grads.vector_mut(self.classifier_bias);
            g += &d_logits;
        }
        let d_fused = params.matrix(self.classifier_weight).t().dot(&d_logits);
        let d_pooled = d_fused.slice(ndarray::s![..self.hidden_width]).to_owned();
        if let (Some(w), Some(b)) = (self.feature_weight, self.feature_bias) {
            let d_proj = d_fused.slice(ndarray::s![self.hidden_width..]);
            let d_pre: Array1<f64> = ndarray::Zip::from(&d_proj)
                .and(&cache.keep)
                .and(&cache.pre_activation)
                .map_collect(|&d, &k, &p| if p > 0.0 { d * k } else { 0.0 });
            {
                let mut g = grads.matrix_mut(w);
                for (i, &dp) in d_pre.iter().enumerate() {
                    g[[i, 0]] += dp * cache.features[0];
                    g[[i, 1]] += dp * cache.features[1];
                }
            }
            let mut g = grads.vector_mut(b);
            g += &d_pre;
        }
        d_pooled
    }
}
