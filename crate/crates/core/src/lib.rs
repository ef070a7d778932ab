//! Toolkit for classifying political question–answer pairs by response
//! clarity (three classes) and evasion technique (nine classes).
//!
//! The crate is split the way the pipeline runs:
//!
//! - [`data`]: taxonomy, records, columnar I/O, stratified splits.
//! - [`features`]: the two boolean discourse features.
//! - [`augment`]: lexical (EDA-style) and frame×context minority-class synthesis.
//! - [`model`]: tokenizer, tiny encoder backbone, feature-fusion head.
//! - [`train`]: focal loss, layer-wise LR decay, warmup+cosine schedule,
//!   gradient accumulation, early stopping, grid search, k-fold.
//! - [`eval`]: confusion matrices, per-class and macro metrics, reports.
//! - [`baselines`]: majority, TF-IDF + linear/kernel/forest models, plain
//!   fine-tuning.

pub mod augment;
pub mod baselines;
pub mod config;
pub mod data;
pub mod eval;
pub mod features;
pub mod model;
pub mod rng;
pub mod train;

pub use data::{ClarityLabel, Dataset, EvasionLabel, QAPair, Source};
