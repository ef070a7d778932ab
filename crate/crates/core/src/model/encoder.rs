//! Encoder backbones.
//!
//! [`TinyEncoder`] is a small random-weight encoder used for tests and desk
//! runs: token and position embeddings followed by residual mixing layers,
//! `x ← x + tanh(x·Wₜᵀ + mean(x)·W꜀ᵀ + b)`. The mean term lets every position
//! (and therefore the pooled first token) see the whole sequence.

use ndarray::{Array1, Array2, Axis};
use rand::Rng;

use super::params::{ParamId, ParamStore};

/// Padded token-id batch with an attention mask.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenBatch {
    pub ids: Vec<Vec<u32>>,
    pub mask: Vec<Vec<bool>>,
}

impl TokenBatch {
    /// Right-pad sequences to a common length.
    pub fn from_sequences(seqs: &[Vec<u32>]) -> Self {
        let len = seqs.iter().map(Vec::len).max().unwrap_or(0);
        let ids = seqs
            .iter()
            .map(|s| {
                let mut row = s.clone();
                row.resize(len, super::tokenizer::PAD_ID);
                row
            })
            .collect();
        let mask = seqs
            .iter()
            .map(|s| (0..len).map(|i| i < s.len()).collect())
            .collect();
        Self { ids, mask }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Unpadded ids of sequence `b`.
    pub fn sequence(&self, b: usize) -> Vec<u32> {
        self.ids[b]
            .iter()
            .zip(&self.mask[b])
            .filter(|(_, &m)| m)
            .map(|(&id, _)| id)
            .collect()
    }
}

/// Interface every backbone implements. Parameters live in a shared
/// [`ParamStore`] owned by the classifier; the backbone records which tensors
/// are its own and tags each with a depth (`layer_count()` for embeddings,
/// down to 0 for the top layer).
pub trait EncoderBackbone: Send + Sync {
    type Cache: Send;

    fn identifier(&self) -> &str;
    fn layer_count(&self) -> usize;
    fn hidden_width(&self) -> usize;
    fn vocab_size(&self) -> usize;
    fn max_positions(&self) -> usize;
    /// Separator string substituted into formatted inputs.
    fn separator(&self) -> &str {
        crate::data::DEFAULT_SEPARATOR
    }

    /// Hidden states (T×H) for one unpadded sequence, plus what backward needs.
    fn encode_sequence(&self, params: &ParamStore, ids: &[u32]) -> (Array2<f64>, Self::Cache);

    /// Accumulate parameter gradients given d(loss)/d(hidden states).
    fn backward(&self, params: &ParamStore, cache: &Self::Cache, d_hidden: &Array2<f64>, grads: &mut ParamStore);

    /// Per-token hidden states for every sequence in a padded batch; masked
    /// positions are dropped.
    fn encode(&self, params: &ParamStore, batch: &TokenBatch) -> Vec<Array2<f64>> {
        (0..batch.len())
            .map(|b| self.encode_sequence(params, &batch.sequence(b)).0)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TinyEncoderConfig {
    pub vocab_size: usize,
    pub hidden_width: usize,
    pub layer_count: usize,
    pub max_positions: usize,
}

impl Default for TinyEncoderConfig {
    fn default() -> Self {
        Self {
            vocab_size: 4096,
            hidden_width: 32,
            layer_count: 2,
            max_positions: 256,
        }
    }
}

#[derive(Debug, Clone)]
struct MixingLayer {
    token: ParamId,
    context: ParamId,
    bias: ParamId,
}

#[derive(Debug, Clone)]
pub struct TinyEncoder {
    identifier: String,
    cfg: TinyEncoderConfig,
    word: ParamId,
    position: ParamId,
    layers: Vec<MixingLayer>,
}

/// Forward intermediates for one sequence.
#[derive(Debug, Clone)]
pub struct TinyCache {
    ids: Vec<u32>,
    /// Input to each layer.
    inputs: Vec<Array2<f64>>,
    /// Mean-pooled input to each layer.
    means: Vec<Array1<f64>>,
    /// tanh activations of each layer.
    activations: Vec<Array2<f64>>,
}

impl TinyEncoder {
    pub const IDENTIFIER: &'static str = "tiny-random";

    /// Register freshly initialized parameters in `store`.
    pub fn new<R: Rng>(cfg: TinyEncoderConfig, store: &mut ParamStore, rng: &mut R) -> Self {
        let h = cfg.hidden_width;
        let l = cfg.layer_count;
        let word = store.push_normal("encoder.embeddings.word", vec![cfg.vocab_size, h], Some(l), 1.0, rng);
        let position = store.push_normal("encoder.embeddings.position", vec![cfg.max_positions, h], Some(l), 0.1, rng);
        let scale = 1.0 / (h as f64).sqrt();
        let layers = (0..l)
            .map(|i| {
                let depth = Some(l - 1 - i);
                MixingLayer {
                    token: store.push_normal(format!("encoder.layer.{i}.token_weight"), vec![h, h], depth, scale, rng),
                    context: store.push_normal(format!("encoder.layer.{i}.context_weight"), vec![h, h], depth, scale, rng),
                    bias: store.push_zeros(format!("encoder.layer.{i}.bias"), vec![h], depth),
                }
            })
            .collect();
        Self {
            identifier: Self::IDENTIFIER.to_string(),
            cfg,
            word,
            position,
            layers,
        }
    }

    /// Re-attach to tensors already present in `store` (checkpoint load).
    pub fn attach(cfg: TinyEncoderConfig, store: &ParamStore) -> Option<Self> {
        let find = |n: &str| store.find(n);
        let layers = (0..cfg.layer_count)
            .map(|i| {
                Some(MixingLayer {
                    token: find(&format!("encoder.layer.{i}.token_weight"))?,
                    context: find(&format!("encoder.layer.{i}.context_weight"))?,
                    bias: find(&format!("encoder.layer.{i}.bias"))?,
                })
            })
            .collect::<Option<Vec<_>>>()?;
        Some(Self {
            identifier: Self::IDENTIFIER.to_string(),
            cfg,
            word: find("encoder.embeddings.word")?,
            position: find("encoder.embeddings.position")?,
            layers,
        })
    }

    pub fn config(&self) -> TinyEncoderConfig {
        self.cfg
    }
}

impl EncoderBackbone for TinyEncoder {
    type Cache = TinyCache;

    fn identifier(&self) -> &str {
        &self.identifier
    }

    fn layer_count(&self) -> usize {
        self.cfg.layer_count
    }

    fn hidden_width(&self) -> usize {
        self.cfg.hidden_width
    }

    fn vocab_size(&self) -> usize {
        self.cfg.vocab_size
    }

    fn max_positions(&self) -> usize {
        self.cfg.max_positions
    }

    fn encode_sequence(&self, params: &ParamStore, ids: &[u32]) -> (Array2<f64>, TinyCache) {
        assert!(!ids.is_empty(), "empty sequence");
        assert!(ids.len() <= self.cfg.max_positions, "sequence longer than position table");
        let h = self.cfg.hidden_width;
        let word = params.matrix(self.word);
        let pos = params.matrix(self.position);
        let mut x = Array2::<f64>::zeros((ids.len(), h));
        for (t, &id) in ids.iter().enumerate() {
            let mut row = x.row_mut(t);
            row += &word.row(id as usize);
            row += &pos.row(t);
        }
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut means = Vec::with_capacity(self.layers.len());
        let mut activations = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let wt = params.matrix(layer.token);
            let wc = params.matrix(layer.context);
            let b = params.vector(layer.bias);
            let mean = x.mean_axis(Axis(0)).expect("non-empty");
            let shift = wc.dot(&mean) + b;
            let mut z = x.dot(&wt.t());
            z += &shift;
            let a = z.mapv(f64::tanh);
            let next = &x + &a;
            inputs.push(std::mem::replace(&mut x, next));
            means.push(mean);
            activations.push(a);
        }
        (
            x,
            TinyCache {
                ids: ids.to_vec(),
                inputs,
                means,
                activations,
            },
        )
    }

    fn backward(&self, params: &ParamStore, cache: &TinyCache, d_hidden: &Array2<f64>, grads: &mut ParamStore) {
        let t_len = cache.ids.len() as f64;
        let mut dx = d_hidden.clone();
        for (li, layer) in self.layers.iter().enumerate().rev() {
            let x = &cache.inputs[li];
            let a = &cache.activations[li];
            let mean = &cache.means[li];
            let dz = &dx * &a.mapv(|v| 1.0 - v * v);
            let dz_sum = dz.sum_axis(Axis(0));
            {
                let mut g = grads.matrix_mut(layer.token);
                g += &dz.t().dot(x);
            }
            {
                let mut g = grads.matrix_mut(layer.context);
                let outer = dz_sum
                    .view()
                    .insert_axis(Axis(1))
                    .dot(&mean.view().insert_axis(Axis(0)));
                g += &outer;
            }
            {
                let mut g = grads.vector_mut(layer.bias);
                g += &dz_sum;
            }
            let wt = params.matrix(layer.token);
            let wc = params.matrix(layer.context);
            let through_mean = wc.t().dot(&dz_sum) / t_len;
            let mut prev = &dx + &dz.dot(&wt);
            prev += &through_mean;
            dx = prev;
        }
        {
            let mut g = grads.matrix_mut(self.word);
            for (t, &id) in cache.ids.iter().enumerate() {
                let mut row = g.row_mut(id as usize);
                row += &dx.row(t);
            }
        }
        let mut g = grads.matrix_mut(self.position);
        for t in 0..cache.ids.len() {
            let mut row = g.row_mut(t);
            row += &dx.row(t);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from;

    fn small() -> (TinyEncoder, ParamStore) {
        let mut store = ParamStore::new();
        let cfg = TinyEncoderConfig {
            vocab_size: 20,
            hidden_width: 4,
            layer_count: 2,
            max_positions: 8,
        };
        let enc = TinyEncoder::new(cfg, &mut store, &mut rng_from(5));
        (enc, store)
    }

    #[test]
    fn depths_run_from_embeddings_to_top() {
        let (_, store) = small();
        let depth = |n: &str| store.get(store.find(n).unwrap()).depth;
        assert_eq!(depth("encoder.embeddings.word"), Some(2));
        assert_eq!(depth("encoder.layer.0.token_weight"), Some(1));
        assert_eq!(depth("encoder.layer.1.bias"), Some(0));
    }

    #[test]
    fn batch_shapes_and_masking() {
        let (enc, store) = small();
        let batch = TokenBatch::from_sequences(&[vec![1, 5, 6, 2], vec![1, 7]]);
        let out = enc.encode(&store, &batch);
        assert_eq!(out[0].dim(), (4, 4));
        assert_eq!(out[1].dim(), (2, 4));
        let alone = enc.encode_sequence(&store, &[1, 7]).0;
        assert_eq!(out[1], alone);
    }

    /// Central finite differences on every encoder scalar for the loss
    /// L = Σ c ⊙ hidden.
    #[test]
    fn backward_matches_finite_differences() {
        let (enc, mut store) = small();
        let ids = [1u32, 9, 4, 2];
        let (h, cache) = enc.encode_sequence(&store, &ids);
        let coef = Array2::from_shape_fn(h.dim(), |(i, j)| ((i * 7 + j * 3) % 5) as f64 - 2.0);
        let mut grads = store.zeros_like();
        enc.backward(&store, &cache, &coef, &mut grads);
        let loss = |s: &ParamStore| (&enc.encode_sequence(s, &ids).0 * &coef).sum();
        let eps = 1e-6;
        for ti in 0..store.tensors.len() {
            for vi in 0..store.tensors[ti].values.len() {
                let orig = store.tensors[ti].values[vi];
                store.tensors[ti].values[vi] = orig + eps;
                let up = loss(&store);
                store.tensors[ti].values[vi] = orig - eps;
                let down = loss(&store);
                store.tensors[ti].values[vi] = orig;
                let numeric = (up - down) / (2.0 * eps);
                let analytic = grads.tensors[ti].values[vi];
                let scale = numeric.abs().max(analytic.abs()).max(1e-6);
                assert!(
                    (numeric - analytic).abs() / scale < 1e-5 || (numeric - analytic).abs() < 1e-8,
                    "{}[{vi}]: analytic {analytic} numeric {numeric}",
                    store.tensors[ti].name
                );
            }
        }
    }
}
