//! Random forest of gini trees over sparse features.
//!
//! Each tree sees a bootstrap sample; repeated rows become integer sample
//! weights multiplied by the balanced class weight. Leaf-size limits count
//! distinct rows.

use rand::Rng;
use rayon::prelude::*;

use super::classical::{balanced_class_weights, check_aligned, LabelIndex};
use super::{BaselineError, SparseMatrix};
use crate::rng::child_rng;

/// Values closer than this are treated as equal when splitting.
const FEATURE_THRESHOLD: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    /// Features examined per split; `None` means ⌊√d⌋.
    pub max_features: Option<usize>,
    pub balanced: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: Some(20),
            min_samples_split: 10,
            min_samples_leaf: 4,
            max_features: None,
            balanced: true,
            seed: 42,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<(), BaselineError> {
        if self.n_trees == 0 || self.min_samples_split < 2 || self.min_samples_leaf == 0 || self.max_features == Some(0) {
            return Err(BaselineError::InvalidConfig(format!(
                "forest: trees {} min_samples_split {} min_samples_leaf {}",
                self.n_trees, self.min_samples_split, self.min_samples_leaf
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf(Vec<f64>),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn leaf_distribution(&self, x: &SparseMatrix, r: usize) -> &[f64] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf(p) => return p,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x.get(r, *feature) <= *threshold { *left } else { *right },
            }
        }
    }
}

struct Builder<'a, R> {
    x: &'a SparseMatrix,
    y: &'a [usize],
    w: &'a [f64],
    k: usize,
    cfg: &'a ForestConfig,
    max_features: usize,
    features: Vec<usize>,
    rng: R,
    nodes: Vec<Node>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    score: f64,
}

fn gini(counts: &[f64]) -> f64 {
    let total: f64 = counts.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    1.0 - counts.iter().map(|c| (c / total) * (c / total)).sum::<f64>()
}

impl<R: Rng> Builder<'_, R> {
    fn class_weights(&self, rows: &[usize]) -> Vec<f64> {
        let mut counts = vec![0.0; self.k];
        for &r in rows {
            counts[self.y[r]] += self.w[r];
        }
        counts
    }

    fn build(&mut self, rows: &[usize], depth: usize) -> usize {
        let counts = self.class_weights(rows);
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf(Vec::new()));
        let n = rows.len();
        let stop = self.cfg.max_depth.is_some_and(|d| depth >= d)
            || n < self.cfg.min_samples_split
            || n < 2 * self.cfg.min_samples_leaf
            || gini(&counts) <= f64::EPSILON;
        let split = if stop { None } else { self.best_split(rows) };
        match split {
            None => {
                let total: f64 = counts.iter().sum();
                self.nodes[id] = Node::Leaf(counts.iter().map(|c| c / total).collect());
            }
            Some(s) => {
                let x = self.x;
                let (l, r): (Vec<usize>, Vec<usize>) =
                    rows.iter().partition(|&&row| x.get(row, s.feature) <= s.threshold);
                let left = self.build(&l, depth + 1);
                let right = self.build(&r, depth + 1);
                self.nodes[id] = Node::Split {
                    feature: s.feature,
                    threshold: s.threshold,
                    left,
                    right,
                };
            }
        }
        id
    }

    fn best_split(&mut self, rows: &[usize]) -> Option<BestSplit> {
        let d = self.x.n_cols;
        let mut present: Vec<usize> = rows.iter().flat_map(|&r| self.x.rows[r].iter().map(|e| e.0)).collect();
        present.sort_unstable();
        present.dedup();
        let min_leaf = self.cfg.min_samples_leaf;
        let mut best: Option<BestSplit> = None;
        let mut visited = 0;
        let mut drawn = 0;
        // Keep drawing until enough non-constant features have been seen.
        while drawn < d && visited < self.max_features {
            let pick = self.rng.gen_range(drawn..d);
            self.features.swap(drawn, pick);
            let f = self.features[drawn];
            drawn += 1;
            if present.binary_search(&f).is_err() {
                continue;
            }
            let mut vals: Vec<(f64, usize)> = rows.iter().map(|&r| (self.x.get(r, f), r)).collect();
            vals.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            if vals[vals.len() - 1].0 <= vals[0].0 + FEATURE_THRESHOLD {
                continue;
            }
            visited += 1;
            let total = self.class_weights(rows);
            let mut left = vec![0.0; self.k];
            for i in 0..vals.len() - 1 {
                let r = vals[i].1;
                left[self.y[r]] += self.w[r];
                if vals[i + 1].0 <= vals[i].0 + FEATURE_THRESHOLD {
                    continue;
                }
                let n_left = i + 1;
                if n_left < min_leaf || vals.len() - n_left < min_leaf {
                    continue;
                }
                let wl: f64 = left.iter().sum();
                let wr: f64 = total.iter().sum::<f64>() - wl;
                if wl <= 0.0 || wr <= 0.0 {
                    continue;
                }
                let score = left.iter().map(|c| c * c).sum::<f64>() / wl
                    + total.iter().zip(&left).map(|(t, l)| (t - l) * (t - l)).sum::<f64>() / wr;
                if best.as_ref().is_none_or(|b| score > b.score) {
                    let mut threshold = (vals[i].0 + vals[i + 1].0) / 2.0;
                    if threshold == vals[i + 1].0 {
                        threshold = vals[i].0;
                    }
                    best = Some(BestSplit { feature: f, threshold, score });
                }
            }
        }
        best
    }
}

#[derive(Debug, Clone)]
pub struct RandomForest {
    classes: LabelIndex,
    trees: Vec<Tree>,
}

impl RandomForest {
    pub fn fit(x: &SparseMatrix, labels: &[usize], cfg: &ForestConfig) -> Result<Self, BaselineError> {
        cfg.validate()?;
        check_aligned(x, labels)?;
        let classes = LabelIndex::fit(labels)?;
        let k = classes.len();
        let y = classes.encode(labels);
        let cw = if cfg.balanced {
            balanced_class_weights(&y, k)
        } else {
            vec![1.0; k]
        };
        let n = x.n_rows();
        let max_features = cfg
            .max_features
            .unwrap_or_else(|| ((x.n_cols as f64).sqrt() as usize).max(1))
            .min(x.n_cols.max(1));
        let trees = (0..cfg.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = child_rng(cfg.seed, &[t as u64]);
                let mut counts = vec![0usize; n];
                for _ in 0..n {
                    counts[rng.gen_range(0..n)] += 1;
                }
                let w: Vec<f64> = (0..n).map(|r| counts[r] as f64 * cw[y[r]]).collect();
                let rows: Vec<usize> = (0..n).filter(|&r| counts[r] > 0).collect();
                let mut b = Builder {
                    x,
                    y: &y,
                    w: &w,
                    k,
                    cfg,
                    max_features,
                    features: (0..x.n_cols).collect(),
                    rng,
                    nodes: Vec::new(),
                };
                b.build(&rows, 0);
                Tree { nodes: b.nodes }
            })
            .collect();
        Ok(Self { classes, trees })
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn max_depth(&self) -> usize {
        fn depth(t: &Tree, at: usize) -> usize {
            match &t.nodes[at] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + depth(t, *left).max(depth(t, *right)),
            }
        }
        self.trees.iter().map(|t| depth(t, 0)).max().unwrap_or(0)
    }

    /// Mean of per-tree leaf distributions, in label order of the training classes.
    pub fn predict_proba(&self, x: &SparseMatrix) -> Vec<Vec<f64>> {
        let k = self.classes.len();
        (0..x.n_rows())
            .map(|r| {
                let mut p = vec![0.0; k];
                for t in &self.trees {
                    for (acc, v) in p.iter_mut().zip(t.leaf_distribution(x, r)) {
                        *acc += v;
                    }
                }
                p.iter_mut().for_each(|v| *v /= self.trees.len() as f64);
                p
            })
            .collect()
    }

    pub fn predict(&self, x: &SparseMatrix) -> Vec<usize> {
        self.predict_proba(x)
            .iter()
            .map(|p| self.classes.decode(crate::model::argmax(ndarray::ArrayView1::from(p.as_slice()))))
            .collect()
    }

    fn leaves(&self) -> impl Iterator<Item = &Vec<f64>> {
        self.trees.iter().flat_map(|t| {
            t.nodes.iter().filter_map(|n| match n {
                Node::Leaf(p) => Some(p),
                Node::Split { .. } => None,
            })
        })
    }

    pub fn n_leaves(&self) -> usize {
        self.leaves().count()
    }
}
