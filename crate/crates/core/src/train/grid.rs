//! Learning-rate × decay-factor grid search.

use std::fmt::Write as _;

use rayon::prelude::*;

use super::{train_loop, TrainError, TrainingConfig};
use crate::data::Dataset;
use crate::model::{ClarityClassifier, EncoderBackbone, ModelError};

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub base_lrs: Vec<f64>,
    pub llrd_alphas: Vec<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            base_lrs: vec![2e-5, 3e-5, 5e-5],
            llrd_alphas: vec![0.8, 0.9, 0.95],
        }
    }
}

impl GridSpec {
    pub fn cells(&self) -> Vec<(f64, f64)> {
        self.base_lrs
            .iter()
            .flat_map(|&lr| self.llrd_alphas.iter().map(move |&a| (lr, a)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridScore {
    pub dev_macro_f1: f64,
    pub best_epoch: usize,
    pub epochs_run: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub base_lr: f64,
    pub llrd_alpha: f64,
    /// Error text when the cell failed; other cells still run.
    pub outcome: Result<GridScore, String>,
}

/// Train one model per cell (all with `cfg.seed`), in parallel, and rank by
/// dev macro F1; failed cells come last. Nothing is selected automatically.
pub fn grid_search<E, F>(
    grid: &GridSpec,
    cfg: &TrainingConfig,
    train: &Dataset,
    dev: &Dataset,
    make_model: F,
) -> Result<Vec<GridRow>, TrainError>
where
    E: EncoderBackbone,
    F: Fn() -> Result<ClarityClassifier<E>, ModelError> + Sync,
{
    let cells = grid.cells();
    if cells.is_empty() {
        return Err(TrainError::InvalidConfig("empty hyperparameter grid".into()));
    }
    let mut rows: Vec<(usize, GridRow)> = cells
        .par_iter()
        .enumerate()
        .map(|(i, &(base_lr, llrd_alpha))| {
            let cell_cfg = TrainingConfig {
                base_lr,
                llrd_alpha,
                ..cfg.clone()
            };
            let outcome = make_model()
                .map_err(TrainError::from)
                .and_then(|m| train_loop(m, train, dev, &cell_cfg))
                .map(|o| GridScore {
                    dev_macro_f1: o.history.best_dev_macro_f1(),
                    best_epoch: o.history.best_epoch,
                    epochs_run: o.history.epochs.len(),
                })
                .map_err(|e| {
                    log::warn!("grid cell lr={base_lr} alpha={llrd_alpha} failed: {e}");
                    e.to_string()
                });
            (
                i,
                GridRow {
                    base_lr,
                    llrd_alpha,
                    outcome,
                },
            )
        })
        .collect();
    rows.sort_by(|(ia, a), (ib, b)| match (&a.outcome, &b.outcome) {
        (Ok(x), Ok(y)) => y.dev_macro_f1.total_cmp(&x.dev_macro_f1).then(ia.cmp(ib)),
        (Ok(_), Err(_)) => std::cmp::Ordering::Less,
        (Err(_), Ok(_)) => std::cmp::Ordering::Greater,
        (Err(_), Err(_)) => ia.cmp(ib),
    });
    Ok(rows.into_iter().map(|(_, r)| r).collect())
}

/// Ranked table as TSV.
pub fn render_grid_table(rows: &[GridRow]) -> String {
    let mut out = String::from("rank\tbase_lr\tllrd_alpha\tdev_macro_f1\tbest_epoch\tepochs_run\terror\n");
    for (i, r) in rows.iter().enumerate() {
        let _ = match &r.outcome {
            Ok(s) => writeln!(
                out,
                "{}\t{:e}\t{}\t{:.4}\t{}\t{}\t",
                i + 1,
                r.base_lr,
                r.llrd_alpha,
                s.dev_macro_f1,
                s.best_epoch,
                s.epochs_run
            ),
            Err(e) => writeln!(out, "{}\t{:e}\t{}\t\t\t\t{}", i + 1, r.base_lr, r.llrd_alpha, e.replace(['\t', '\n'], " ")),
        };
    }
    out
}
