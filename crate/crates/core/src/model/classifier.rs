use std::sync::atomic::{AtomicUsize, Ordering};

use ndarray::{Array1, Array2, ArrayView1};

use super::encoder::{EncoderBackbone, TinyEncoder, TokenBatch};
use super::head::{FusionHead, HeadCache};
use super::params::ParamStore;
use super::tokenizer::HashTokenizer;
use super::{ModelConfig, ModelError};
use crate::data::QAPair;
use crate::rng::{rng_from, SeededRng};

/// Model input: padded token ids, mask and the boolean feature pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelBatch {
    pub tokens: TokenBatch,
    pub features: Vec<[f64; 2]>,
}

impl ModelBatch {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Rows `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> ModelBatch {
        let seqs: Vec<Vec<u32>> = indices.iter().map(|&i| self.tokens.sequence(i)).collect();
        ModelBatch {
            tokens: TokenBatch::from_sequences(&seqs),
            features: indices.iter().map(|&i| self.features[i]).collect(),
        }
    }
}

/// Per-sample intermediates kept for the backward pass.
pub struct SampleCache<C> {
    encoder: C,
    seq_len: usize,
    head: HeadCache,
}

/// Encoder backbone + fusion head over a single parameter store.
pub struct ClarityClassifier<E: EncoderBackbone = TinyEncoder> {
    config: ModelConfig,
    tokenizer: HashTokenizer,
    encoder: E,
    head: FusionHead,
    params: ParamStore,
    truncations: AtomicUsize,
}

impl<E: EncoderBackbone + Clone> Clone for ClarityClassifier<E> {
    fn clone(&self) -> Self {
        Self {
            config: self.config.clone(),
            tokenizer: self.tokenizer.clone(),
            encoder: self.encoder.clone(),
            head: self.head.clone(),
            params: self.params.clone(),
            truncations: AtomicUsize::new(self.truncation_count()),
        }
    }
}

impl ClarityClassifier<TinyEncoder> {
    /// Fresh tiny-encoder model initialized from `config.init_seed`.
    pub fn new_tiny(config: ModelConfig) -> Result<Self, ModelError> {
        config.validate()?;
        let mut params = ParamStore::new();
        let mut rng = rng_from(config.init_seed);
        let encoder = TinyEncoder::new(config.tiny_encoder(), &mut params, &mut rng);
        let head = FusionHead::new(
            config.hidden_width,
            config.effective_feature_width(),
            config.num_classes,
            config.dropout,
            &mut params,
            &mut rng,
        );
        Ok(Self::from_parts(config, encoder, head, params))
    }

    /// Rebuild from a stored parameter set.
    pub fn from_params(config: ModelConfig, params: ParamStore) -> Result<Self, ModelError> {
        config.validate()?;
        let reference = Self::new_tiny(config.clone())?;
        if !reference.params.same_layout(&params) {
            return Err(ModelError::Checkpoint("parameter layout does not match config".into()));
        }
        let encoder = TinyEncoder::attach(config.tiny_encoder(), &params)
            .ok_or_else(|| ModelError::Checkpoint("missing encoder tensors".into()))?;
        let head = FusionHead::attach(
            config.hidden_width,
            config.effective_feature_width(),
            config.num_classes,
            config.dropout,
            &params,
        )
        .ok_or_else(|| ModelError::Checkpoint("missing head tensors".into()))?;
        Ok(Self::from_parts(config, encoder, head, params))
    }
}

impl<E: EncoderBackbone> ClarityClassifier<E> {
    pub fn from_parts(config: ModelConfig, encoder: E, head: FusionHead, params: ParamStore) -> Self {
        let tokenizer = HashTokenizer::new(encoder.vocab_size() as u32);
        Self {
            config,
            tokenizer,
            encoder,
            head,
            params,
            truncations: AtomicUsize::new(0),
        }
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn encoder(&self) -> &E {
        &self.encoder
    }

    pub fn head(&self) -> &FusionHead {
        &self.head
    }

    pub fn params(&self) -> &ParamStore {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.params
    }

    pub fn set_params(&mut self, params: ParamStore) {
        assert!(self.params.same_layout(&params), "parameter layout mismatch");
        self.params = params;
    }

    pub fn num_classes(&self) -> usize {
        self.config.num_classes
    }

    /// Number of sequences shortened so far (tokenizer or forward).
    pub fn truncation_count(&self) -> usize {
        self.truncations.load(Ordering::Relaxed)
    }

    /// Tokenize records into a model batch.
    pub fn encode_pairs<'a, I>(&self, pairs: I) -> ModelBatch
    where
        I: IntoIterator<Item = &'a QAPair>,
    {
        let mut seqs = Vec::new();
        let mut features = Vec::new();
        for p in pairs {
            let enc = self
                .tokenizer
                .encode_pair(&p.question, &p.answer, self.config.max_sequence_length);
            if enc.truncated {
                self.truncations.fetch_add(1, Ordering::Relaxed);
            }
            seqs.push(enc.ids);
            features.push(p.features.as_vector());
        }
        ModelBatch {
            tokens: TokenBatch::from_sequences(&seqs),
            features,
        }
    }

    fn sequence(&self, batch: &ModelBatch, b: usize) -> Vec<u32> {
        let mut ids = batch.tokens.sequence(b);
        let limit = self.config.max_sequence_length.min(self.encoder.max_positions());
        if ids.len() > limit {
            ids.truncate(limit);
            self.truncations.fetch_add(1, Ordering::Relaxed);
        }
        ids
    }

    fn forward_one(&self, ids: &[u32], features: [f64; 2], dropout_seed: Option<u64>) -> (Array1<f64>, SampleCache<E::Cache>) {
        let (hidden, enc_cache) = self.encoder.encode_sequence(&self.params, ids);
        let pooled = hidden.row(0);
        let mut rng: Option<SeededRng> = dropout_seed.map(rng_from);
        let (logits, head_cache) = self.head.forward(&self.params, pooled, features, rng.as_mut());
        (
            logits,
            SampleCache {
                encoder: enc_cache,
                seq_len: ids.len(),
                head: head_cache,
            },
        )
    }

    /// Evaluation-mode logits (B×K); dropout off, deterministic.
    pub fn forward(&self, batch: &ModelBatch) -> Array2<f64> {
        let mut out = Array2::zeros((batch.len(), self.num_classes()));
        for b in 0..batch.len() {
            let ids = self.sequence(batch, b);
            let (logits, _) = self.forward_one(&ids, batch.features[b], None);
            out.row_mut(b).assign(&logits);
        }
        out
    }

    /// Logits plus caches. With `dropout_seeds`, sample `b` draws its dropout
    /// mask from `dropout_seeds[b]` (training mode).
    pub fn forward_with_cache(&self, batch: &ModelBatch, dropout_seeds: Option<&[u64]>) -> (Array2<f64>, Vec<SampleCache<E::Cache>>) {
        let mut out = Array2::zeros((batch.len(), self.num_classes()));
        let mut caches = Vec::with_capacity(batch.len());
        for b in 0..batch.len() {
            let ids = self.sequence(batch, b);
            let seed = dropout_seeds.map(|s| s[b]);
            let (logits, cache) = self.forward_one(&ids, batch.features[b], seed);
            out.row_mut(b).assign(&logits);
            caches.push(cache);
        }
        (out, caches)
    }

    /// Accumulate d(loss)/d(params) into `grads` given d(loss)/d(logits).
    pub fn backward(&self, caches: &[SampleCache<E::Cache>], d_logits: &Array2<f64>, grads: &mut ParamStore) {
        let h = self.encoder.hidden_width();
        for (b, cache) in caches.iter().enumerate() {
            let d_pooled = self.head.backward(&self.params, &cache.head, d_logits.row(b), grads);
            let mut d_hidden = Array2::zeros((cache.seq_len, h));
            d_hidden.row_mut(0).assign(&d_pooled);
            self.encoder.backward(&self.params, &cache.encoder, &d_hidden, grads);
        }
    }

    /// Softmax probabilities per row.
    pub fn predict_proba(&self, batch: &ModelBatch) -> Array2<f64> {
        let mut logits = self.forward(batch);
        for mut row in logits.rows_mut() {
            let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
            row.mapv_inplace(|v| (v - max).exp());
            let sum = row.sum();
            row.mapv_inplace(|v| v / sum);
        }
        logits
    }

    /// Argmax class codes.
    pub fn predict(&self, batch: &ModelBatch) -> Vec<usize> {
        self.forward(batch).rows().into_iter().map(argmax).collect()
    }
}

/// Index of the largest value; ties resolve to the smallest index.
pub fn argmax(row: ArrayView1<'_, f64>) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{ClarityLabel, QAPair};
    use ndarray::array;

    pub(crate) fn tiny_config() -> ModelConfig {
        ModelConfig {
            vocab_size: 64,
            hidden_width: 6,
            layer_count: 2,
            feature_width: 4,
            max_sequence_length: 24,
            init_seed: 3,
            ..ModelConfig::default()
        }
    }

    fn pairs() -> Vec<QAPair> {
        vec![
            QAPair::new("a", "Will you act?", "Yes.").unwrap(),
            QAPair::new("b", "Why did you do it? And when?", "I cannot comment on that.").unwrap(),
            QAPair::new("c", "Is it true?", "Well, it depends on many things.").unwrap(),
            QAPair::new("d", "What now?", "We will see.").unwrap(),
        ]
    }

    #[test]
    fn shape_finiteness_and_determinism() {
        let m = ClarityClassifier::new_tiny(tiny_config()).unwrap();
        let batch = m.encode_pairs(&pairs());
        let l1 = m.forward(&batch);
        assert_eq!(l1.dim(), (4, 3));
        assert!(l1.iter().all(|v| v.is_finite()));
        assert_eq!(l1, m.forward(&batch));
    }

    #[test]
    fn pooled_output_is_first_token() {
        let m = ClarityClassifier::new_tiny(tiny_config()).unwrap();
        let batch = m.encode_pairs(&pairs()[..1]);
        let (hidden, _) = m.encoder().encode_sequence(m.params(), &batch.tokens.sequence(0));
        let (expected, _) = m.head().forward::<SeededRng>(m.params(), hidden.row(0), batch.features[0], None);
        assert_eq!(m.forward(&batch).row(0), expected);
    }

    #[test]
    fn zero_classifier_weight_returns_bias() {
        let mut m = ClarityClassifier::new_tiny(tiny_config()).unwrap();
        let w = m.head().classifier_weight();
        let b = m.head().classifier_bias();
        m.params_mut().get_mut(w).values.iter_mut().for_each(|v| *v = 0.0);
        m.params_mut().get_mut(b).values = vec![0.25, -1.0, 2.0];
        let logits = m.forward(&m.encode_pairs(&pairs()));
        for row in logits.rows() {
            assert_eq!(row.to_vec(), vec![0.25, -1.0, 2.0]);
        }
    }

    #[test]
    fn zeroed_feature_projection_ignores_features() {
        let mut m = ClarityClassifier::new_tiny(tiny_config()).unwrap();
        let fw = m.head().feature_weight().unwrap();
        let fb = m.head().feature_bias().unwrap();
        m.params_mut().get_mut(fw).values.iter_mut().for_each(|v| *v = 0.0);
        m.params_mut().get_mut(fb).values.iter_mut().for_each(|v| *v = 0.0);
        let mut batch = m.encode_pairs(&pairs());
        let base = m.forward(&batch);
        for f in batch.features.iter_mut() {
            *f = [1.0 - f[0], 1.0 - f[1]];
        }
        assert_eq!(base, m.forward(&batch));
    }

    #[test]
    fn argmax_tie_prefers_smallest_code() {
        assert_eq!(argmax(array![0.1, 0.9, 0.0].view()), 1);
        assert_eq!(argmax(array![0.5, 0.5, 0.5].view()), 0);
        assert_eq!(argmax(array![0.0, 0.7, 0.7].view()), 1);
    }

    #[test]
    fn long_sequences_are_truncated_and_counted() {
        let m = ClarityClassifier::new_tiny(tiny_config()).unwrap();
        let long = QAPair::new("x", "Will you act?", "word ".repeat(200)).unwrap();
        let batch = m.encode_pairs([&long]);
        assert_eq!(batch.tokens.ids[0].len(), 24);
        assert_eq!(m.truncation_count(), 1);
        // Hand-built overlong batch is clipped in forward, not rejected.
        let raw = ModelBatch {
            tokens: TokenBatch::from_sequences(&[vec![5; 40]]),
            features: vec![[0.0, 0.0]],
        };
        assert_eq!(m.forward(&raw).dim(), (1, 3));
        assert_eq!(m.truncation_count(), 2);
    }

    #[test]
    fn predictions_are_label_codes() {
        let m = ClarityClassifier::new_tiny(tiny_config()).unwrap();
        let preds = m.predict(&m.encode_pairs(&pairs()));
        assert_eq!(preds.len(), 4);
        assert!(preds.iter().all(|&p| ClarityLabel::from_code(p).is_some()));
        let proba = m.predict_proba(&m.encode_pairs(&pairs()));
        for row in proba.rows() {
            assert!((row.sum() - 1.0).abs() < 1e-12);
        }
    }

    /// Central differences for L = Σ c ⊙ logits over every parameter,
    /// training mode with fixed dropout seeds.
    #[test]
    fn full_model_gradient_matches_finite_differences() {
        let mut m = ClarityClassifier::new_tiny(tiny_config()).unwrap();
        let batch = m.encode_pairs(&pairs()[..2]);
        let seeds = [11u64, 12];
        let coef = array![[1.0, -0.5, 0.25], [-1.0, 2.0, 0.5]];
        let (_, caches) = m.forward_with_cache(&batch, Some(&seeds));
        let mut grads = m.params().zeros_like();
        m.backward(&caches, &coef, &mut grads);
        let eps = 1e-6;
        let loss = |m: &ClarityClassifier| (&m.forward_with_cache(&batch, Some(&seeds)).0 * &coef).sum();
        let mut worst = 0.0f64;
        for ti in 0..m.params().tensors.len() {
            for vi in 0..m.params().tensors[ti].values.len() {
                let analytic = grads.tensors[ti].values[vi];
                let orig = m.params().tensors[ti].values[vi];
                m.params_mut().tensors[ti].values[vi] = orig + eps;
                let up = loss(&m);
                m.params_mut().tensors[ti].values[vi] = orig - eps;
                let down = loss(&m);
                m.params_mut().tensors[ti].values[vi] = orig;
                let numeric = (up - down) / (2.0 * eps);
                let err = (numeric - analytic).abs() / numeric.abs().max(analytic.abs()).max(1e-4);
                worst = worst.max(err);
            }
        }
        assert!(worst < 1e-4, "worst relative error {worst}");
    }
}
