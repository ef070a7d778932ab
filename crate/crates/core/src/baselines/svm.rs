//! Kernel SVM: libsvm-style SMO per class pair, one-vs-one voting, and a
//! cross-validated grid over C and kernel.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::classical::{balanced_class_weights, check_aligned, LabelIndex};
use super::{BaselineError, SparseMatrix};
use crate::data::stratified_fold_ids;
use crate::eval::{confusion_matrix, macro_f1};

/// Floor for non-positive curvature in the two-variable update.
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    Linear,
    /// `exp(-γ‖a - b‖²)` with `γ = 1 / (d · var(X))` computed on the training matrix.
    Rbf,
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kernel::Linear => "linear",
            Kernel::Rbf => "rbf",
        })
    }
}

impl FromStr for Kernel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" => Ok(Kernel::Linear),
            "rbf" => Ok(Kernel::Rbf),
            other => Err(format!("unknown kernel {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmConfig {
    pub c_grid: Vec<f64>,
    pub kernels: Vec<Kernel>,
    pub folds: usize,
    pub seed: u64,
    /// Stopping tolerance on the maximal KKT violation.
    pub tol: f64,
    pub max_iter: usize,
    pub balanced: bool,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            c_grid: vec![0.1, 1.0, 10.0],
            kernels: vec![Kernel::Linear, Kernel::Rbf],
            folds: 3,
            seed: 42,
            tol: 1e-3,
            max_iter: 10_000_000,
            balanced: true,
        }
    }
}

impl SvmConfig {
    pub fn validate(&self) -> Result<(), BaselineError> {
        if self.c_grid.is_empty() || self.kernels.is_empty() || self.c_grid.iter().any(|&c| !(c > 0.0)) {
            return Err(BaselineError::InvalidConfig("svm grid needs positive C values and a kernel".into()));
        }
        if self.folds < 2 || !(self.tol > 0.0) {
            return Err(BaselineError::InvalidConfig(format!("svm folds {} tol {}", self.folds, self.tol)));
        }
        Ok(())
    }
}

/// Linear Gram matrix over the training rows plus squared norms.
struct Gram {
    n: usize,
    dots: Vec<f64>,
}

impl Gram {
    fn new(x: &SparseMatrix) -> Self {
        let n = x.n_rows();
        let dots: Vec<f64> = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| (0..n).map(move |j| SparseMatrix::row_dot(&x.rows[i], &x.rows[j])))
            .collect();
        Self { n, dots }
    }

    fn dot(&self, a: usize, b: usize) -> f64 {
        self.dots[a * self.n + b]
    }

    fn kernel(&self, kernel: Kernel, gamma: f64, a: usize, b: usize) -> f64 {
        match kernel {
            Kernel::Linear => self.dot(a, b),
            Kernel::Rbf => (-gamma * (self.dot(a, a) + self.dot(b, b) - 2.0 * self.dot(a, b))).exp(),
        }
    }
}

struct BinarySolution {
    alpha: Vec<f64>,
    rho: f64,
    iterations: usize,
}

/// Solve `min ½αᵀQα − Σα` s.t. `yᵀα = 0`, `0 ≤ αᵢ ≤ capᵢ` with
/// `Qᵢⱼ = yᵢyⱼK(i, j)`, using second-order working-set selection.
fn solve_binary(k: impl Fn(usize, usize) -> f64, y: &[f64], cap: &[f64], tol: f64, max_iter: usize) -> BinarySolution {
    let n = y.len();
    let q = |i: usize, j: usize| y[i] * y[j] * k(i, j);
    let qd: Vec<f64> = (0..n).map(|i| k(i, i)).collect();
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let upper = |a: &[f64], t: usize| a[t] >= cap[t];
    let lower = |a: &[f64], t: usize| a[t] <= 0.0;
    let mut iterations = 0;
    while iterations < max_iter {
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            let v = -y[t] * grad[t];
            let movable = if y[t] > 0.0 { !upper(&alpha, t) } else { !lower(&alpha, t) };
            if movable && v >= gmax {
                gmax = v;
                i_sel = Some(t);
            }
        }
        let Some(i) = i_sel else { break };
        let qi: Vec<f64> = (0..n).map(|t| q(i, t)).collect();
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j_sel = None;
        let mut best = f64::INFINITY;
        for t in 0..n {
            let movable = if y[t] > 0.0 { !lower(&alpha, t) } else { !upper(&alpha, t) };
            if !movable {
                continue;
            }
            let yg = y[t] * grad[t];
            gmax2 = gmax2.max(yg);
            let diff = gmax + yg;
            if diff > 0.0 {
                let curv = qd[i] + qd[t] - 2.0 * y[i] * y[t] * qi[t];
                let obj = -(diff * diff) / if curv > 0.0 { curv } else { TAU };
                if obj <= best {
                    best = obj;
                    j_sel = Some(t);
                }
            }
        }
        if gmax + gmax2 < tol {
            break;
        }
        let Some(j) = j_sel else { break };
        iterations += 1;
        let qj: Vec<f64> = (0..n).map(|t| q(j, t)).collect();
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let (ci, cj) = (cap[i], cap[j]);
        if y[i] != y[j] {
            let curv = (qd[i] + qd[j] + 2.0 * qi[j]).max(TAU);
            let delta = (-grad[i] - grad[j]) / curv;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > ci - cj {
                if alpha[i] > ci {
                    alpha[i] = ci;
                    alpha[j] = ci - diff;
                }
            } else if alpha[j] > cj {
                alpha[j] = cj;
                alpha[i] = cj + diff;
            }
        } else {
            let curv = (qd[i] + qd[j] - 2.0 * qi[j]).max(TAU);
            let delta = (grad[i] - grad[j]) / curv;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > ci {
                if alpha[i] > ci {
                    alpha[i] = ci;
                    alpha[j] = sum - ci;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > cj {
                if alpha[j] > cj {
                    alpha[j] = cj;
                    alpha[i] = sum - cj;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += qi[t] * di + qj[t] * dj;
        }
    }
    if iterations >= max_iter {
        log::warn!("svm solver hit max_iter {max_iter}");
    }
    // Offset: mean of yG over free vectors, else the middle of the feasible interval.
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free, mut sum_free) = (0usize, 0.0);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if upper(&alpha, t) {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if lower(&alpha, t) {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum_free += yg;
        }
    }
    let rho = if free > 0 { sum_free / free as f64 } else { (ub + lb) / 2.0 };
    BinarySolution {
        alpha,
        rho,
        iterations,
    }
}

#[derive(Debug, Clone)]
struct PairModel {
    /// `(support vector position, αᵢyᵢ)`
    coef: Vec<(usize, f64)>,
    rho: f64,
}

/// Fitted one-vs-one SVM.
#[derive(Debug, Clone)]
pub struct SvmModel {
    kernel: Kernel,
    c: f64,
    gamma: f64,
    classes: LabelIndex,
    support: SparseMatrix,
    support_norms: Vec<f64>,
    /// Pairs `(p, q)` with `p < q` in lexicographic order.
    pairs: Vec<PairModel>,
    iterations: usize,
}

impl SvmModel {
    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn n_support(&self) -> usize {
        self.support.n_rows()
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Fit on all rows of `x` with a fixed kernel and C.
    pub fn fit(x: &SparseMatrix, labels: &[usize], kernel: Kernel, c: f64, cfg: &SvmConfig) -> Result<Self, BaselineError> {
        check_aligned(x, labels)?;
        let gram = Gram::new(x);
        let all: Vec<usize> = (0..x.n_rows()).collect();
        fit_rows(&gram, x, labels, &all, kernel, c, cfg)
    }

    /// Pairwise decision values in pair order.
    pub fn decision_values(&self, x: &SparseMatrix) -> Vec<Vec<f64>> {
        (0..x.n_rows())
            .map(|r| {
                let row = &x.rows[r];
                let norm = SparseMatrix::row_dot(row, row);
                let kv: Vec<f64> = self
                    .support
                    .rows
                    .iter()
                    .zip(&self.support_norms)
                    .map(|(s, &sn)| {
                        let dot = SparseMatrix::row_dot(s, row);
                        match self.kernel {
                            Kernel::Linear => dot,
                            Kernel::Rbf => (-self.gamma * (sn + norm - 2.0 * dot)).exp(),
                        }
                    })
                    .collect();
                self.pairs
                    .iter()
                    .map(|p| p.coef.iter().map(|&(s, a)| a * kv[s]).sum::<f64>() - p.rho)
                    .collect()
            })
            .collect()
    }

    /// One vote per pair; ties go to the smaller label.
    pub fn predict(&self, x: &SparseMatrix) -> Vec<usize> {
        let k = self.classes.len();
        self.decision_values(x)
            .into_iter()
            .map(|dec| {
                let mut votes = vec![0usize; k];
                let mut d = dec.into_iter();
                for p in 0..k {
                    for q in p + 1..k {
                        if d.next().unwrap() > 0.0 {
                            votes[p] += 1;
                        } else {
                            votes[q] += 1;
                        }
                    }
                }
                let best = (0..k).fold(0, |b, c| if votes[c] > votes[b] { c } else { b });
                self.classes.decode(best)
            })
            .collect()
    }
}

fn fit_rows(
    gram: &Gram,
    x: &SparseMatrix,
    labels: &[usize],
    rows: &[usize],
    kernel: Kernel,
    c: f64,
    cfg: &SvmConfig,
) -> Result<SvmModel, BaselineError> {
    let sub_labels: Vec<usize> = rows.iter().map(|&r| labels[r]).collect();
    let classes = LabelIndex::fit(&sub_labels)?;
    let k = classes.len();
    let enc = classes.encode(&sub_labels);
    let weights = if cfg.balanced {
        balanced_class_weights(&enc, k)
    } else {
        vec![1.0; k]
    };
    let gamma = match kernel {
        Kernel::Linear => 0.0,
        Kernel::Rbf => {
            let var = x.select(rows).variance();
            if var > 0.0 {
                1.0 / (x.n_cols as f64 * var)
            } else {
                1.0
            }
        }
    };
    let mut support_rows: Vec<usize> = Vec::new();
    let mut raw_pairs: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
    let mut iterations = 0;
    for p in 0..k {
        for q in p + 1..k {
            // Class p rows first, then class q, each in input order.
            let members: Vec<usize> = (0..rows.len())
                .filter(|&t| enc[t] == p)
                .chain((0..rows.len()).filter(|&t| enc[t] == q))
                .collect();
            let y: Vec<f64> = members.iter().map(|&t| if enc[t] == p { 1.0 } else { -1.0 }).collect();
            let cap: Vec<f64> = members.iter().map(|&t| c * weights[enc[t]]).collect();
            let sol = solve_binary(
                |a, b| gram.kernel(kernel, gamma, rows[members[a]], rows[members[b]]),
                &y,
                &cap,
                cfg.tol,
                cfg.max_iter,
            );
            iterations += sol.iterations;
            let coef = members
                .iter()
                .zip(&sol.alpha)
                .zip(&y)
                .filter(|((_, &a), _)| a > 0.0)
                .map(|((&t, &a), &yy)| (rows[t], a * yy))
                .collect();
            raw_pairs.push((coef, sol.rho));
        }
    }
    for (coef, _) in &raw_pairs {
        support_rows.extend(coef.iter().map(|&(r, _)| r));
    }
    support_rows.sort_unstable();
    support_rows.dedup();
    let pairs = raw_pairs
        .into_iter()
        .map(|(coef, rho)| PairModel {
            coef: coef
                .into_iter()
                .map(|(r, a)| (support_rows.binary_search(&r).unwrap(), a))
                .collect(),
            rho,
        })
        .collect();
    let support_norms = support_rows.iter().map(|&r| gram.dot(r, r)).collect();
    Ok(SvmModel {
        kernel,
        c,
        gamma,
        classes,
        support: x.select(&support_rows),
        support_norms,
        pairs,
        iterations,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmCell {
    pub c: f64,
    pub kernel: Kernel,
    pub fold_macro_f1: Vec<f64>,
    pub mean_macro_f1: f64,
}

#[derive(Debug, Clone)]
pub struct SvmGridResult {
    /// C-major, kernel-minor order.
    pub cells: Vec<SvmCell>,
    pub best: usize,
    /// Best cell refit on every training row.
    pub model: SvmModel,
}

impl SvmGridResult {
    pub fn best_cell(&self) -> &SvmCell {
        &self.cells[self.best]
    }
}

/// Stratified k-fold grid over C × kernel scored by mean macro F1; the
/// first cell wins ties. The winner is refit on all rows.
pub fn svm_grid_search(x: &SparseMatrix, labels: &[usize], cfg: &SvmConfig) -> Result<SvmGridResult, BaselineError> {
    cfg.validate()?;
    check_aligned(x, labels)?;
    let classes = LabelIndex::fit(labels)?;
    let enc = classes.encode(labels);
    let fold_of = stratified_fold_ids(&enc, cfg.folds, cfg.seed).map_err(|(class, count)| {
        BaselineError::InvalidConfig(format!(
            "class {} has {count} records, fewer than {} folds",
            classes.decode(class),
            cfg.folds
        ))
    })?;
    let gram = Gram::new(x);
    let grid: Vec<(f64, Kernel)> = cfg
        .c_grid
        .iter()
        .flat_map(|&c| cfg.kernels.iter().map(move |&k| (c, k)))
        .collect();
    let names: Vec<String> = (0..classes.len()).map(|c| c.to_string()).collect();
    let cells: Vec<SvmCell> = grid
        .par_iter()
        .map(|&(c, kernel)| {
            let scores = (0..cfg.folds)
                .map(|f| {
                    let train: Vec<usize> = (0..x.n_rows()).filter(|&r| fold_of[r] != f).collect();
                    let held: Vec<usize> = (0..x.n_rows()).filter(|&r| fold_of[r] == f).collect();
                    let model = fit_rows(&gram, x, labels, &train, kernel, c, cfg)?;
                    let preds = classes.encode(&model.predict(&x.select(&held)));
                    let truth: Vec<usize> = held.iter().map(|&r| enc[r]).collect();
                    Ok(macro_f1(&confusion_matrix(&truth, &preds, names.clone())?))
                })
                .collect::<Result<Vec<f64>, BaselineError>>()?;
            let mean = scores.iter().sum::<f64>() / scores.len() as f64;
            Ok(SvmCell {
                c,
                kernel,
                fold_macro_f1: scores,
                mean_macro_f1: mean,
            })
        })
        .collect::<Result<_, BaselineError>>()?;
    let best = (0..cells.len()).fold(0, |b, i| if cells[i].mean_macro_f1 > cells[b].mean_macro_f1 { i } else { b });
    let all: Vec<usize> = (0..x.n_rows()).collect();
    let model = fit_rows(&gram, x, labels, &all, cells[best].kernel, cells[best].c, cfg)?;
    Ok(SvmGridResult { cells, best, model })
}
