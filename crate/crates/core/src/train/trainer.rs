//! The optimization loop.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::Array2;
use rand::seq::SliceRandom;

use super::focal::{inverse_frequency_weights, FocalLoss};
use super::llrd::{llrd_param_groups, tensor_learning_rates};
use super::optimizer::{clip_grad_norm, AdamW, AdamWConfig};
use super::schedule::LrSchedule;
use super::{ClassWeighting, TrainError, TrainingConfig};
use crate::data::{Dataset, Task};
use crate::eval::{accuracy, confusion_matrix, macro_f1};
use crate::model::{ClarityClassifier, EncoderBackbone, ModelBatch, ParamStore};
use crate::rng::{child_rng, derive_seed};

const ORDER_STREAM: u64 = 1;
const DROPOUT_STREAM: u64 = 2;

/// Outcome of one pass over the training set.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    /// Sample-weighted mean loss of the epoch's training-mode forward passes.
    pub train_loss: f64,
    pub optimizer_steps: usize,
    /// Base learning rate (depth 0) used at each optimizer step.
    pub lr_trace: Vec<f64>,
}

/// Holds the model, optimizer state and the encoded training set.
pub struct Trainer<E: EncoderBackbone> {
    model: ClarityClassifier<E>,
    cfg: TrainingConfig,
    loss: FocalLoss,
    tensor_lrs: Vec<f64>,
    optimizer: AdamW,
    schedule: LrSchedule,
    inputs: ModelBatch,
    targets: Vec<usize>,
    weights: Vec<f64>,
    steps_done: usize,
}

impl<E: EncoderBackbone> Trainer<E> {
    pub fn new(model: ClarityClassifier<E>, train: &Dataset, cfg: &TrainingConfig) -> Result<Self, TrainError> {
        cfg.validate()?;
        if train.is_empty() {
            return Err(TrainError::EmptyDataset("training".into()));
        }
        let task = model.config().task;
        let targets = train.targets(task)?;
        let k = task.num_classes();
        let class_weights = match cfg.class_weighting {
            ClassWeighting::InverseFrequency => {
                let mut counts = vec![0usize; k];
                for &t in &targets {
                    counts[t] += 1;
                }
                inverse_frequency_weights(&counts).map_err(|e| match e {
                    TrainError::EmptyClass(c) => TrainError::InvalidConfig(format!(
                        "inverse-frequency weights need every class in the training set; {:?} has no records",
                        task.label_name(c).unwrap_or("?")
                    )),
                    other => other,
                })?
            }
            ClassWeighting::Uniform => vec![1.0; k],
        };
        let loss = FocalLoss::new(cfg.gamma, class_weights)?;
        let weights = train
            .iter()
            .map(|r| if cfg.use_sample_weights { r.sample_weight } else { 1.0 })
            .collect::<Vec<_>>();
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(TrainError::InvalidConfig(format!("sample weight {w} must be positive")));
        }
        let groups = llrd_param_groups(model.params(), cfg.base_lr, cfg.llrd_alpha)?;
        let tensor_lrs = tensor_learning_rates(&groups, model.params().tensors.len());
        let optimizer = AdamW::new(
            model.params(),
            AdamWConfig {
                weight_decay: cfg.weight_decay,
                ..AdamWConfig::default()
            },
        );
        let inputs = model.encode_pairs(train.iter());
        let mut trainer = Self {
            model,
            cfg: cfg.clone(),
            loss,
            tensor_lrs,
            optimizer,
            schedule: LrSchedule::new(cfg.schedule, 0, cfg.warmup_fraction),
            inputs,
            targets,
            weights,
            steps_done: 0,
        };
        trainer.schedule = LrSchedule::new(cfg.schedule, trainer.steps_per_epoch() * cfg.max_epochs, cfg.warmup_fraction);
        Ok(trainer)
    }

    /// Leftover micro-batches at the end of an epoch get their own step.
    pub fn steps_per_epoch(&self) -> usize {
        let micro = self.targets.len().div_ceil(self.cfg.micro_batch);
        micro.div_ceil(self.cfg.accumulation_steps)
    }

    pub fn schedule(&self) -> &LrSchedule {
        &self.schedule
    }

    pub fn class_weights(&self) -> &[f64] {
        &self.loss.class_weights
    }

    pub fn model(&self) -> &ClarityClassifier<E> {
        &self.model
    }

    pub fn model_mut(&mut self) -> &mut ClarityClassifier<E> {
        &mut self.model
    }

    pub fn into_model(self) -> ClarityClassifier<E> {
        self.model
    }

    /// Seeded sample order of `epoch`.
    pub fn epoch_order(&self, epoch: usize) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.targets.len()).collect();
        order.shuffle(&mut child_rng(self.cfg.seed, &[ORDER_STREAM, epoch as u64]));
        order
    }

    /// Weighted loss over the training set in evaluation mode.
    pub fn dataset_loss(&self) -> Result<f64, TrainError> {
        let logits = self.model.forward(&self.inputs);
        self.loss.loss(&logits, &self.targets, &self.weights)
    }

    fn optimizer_step(&mut self, grads: &mut ParamStore, weight_sum: f64, lr_trace: &mut Vec<f64>) {
        grads.scale(1.0 / weight_sum);
        clip_grad_norm(grads, self.cfg.max_grad_norm);
        let m = self.schedule.multiplier(self.steps_done);
        let lrs: Vec<f64> = self.tensor_lrs.iter().map(|lr| lr * m).collect();
        self.optimizer.step(self.model.params_mut(), grads, &lrs);
        self.steps_done += 1;
        lr_trace.push(self.cfg.base_lr * m);
        grads.fill_zero();
    }

    /// One pass over the training set. Gradients are summed as `Σ wᵢ ∇lᵢ`
    /// over `accumulation_steps` micro-batches and divided by `Σ wᵢ` at the
    /// step, so accumulation reproduces the large-batch update; dropout
    /// seeds depend on the position in the epoch, not on the batching.
    pub fn run_epoch(&mut self, epoch: usize) -> Result<EpochStats, TrainError> {
        let order = self.epoch_order(epoch);
        let mut grads = self.model.params().zeros_like();
        let mut pending_weight = 0.0;
        let mut pending_micro = 0;
        let mut loss_sum = 0.0;
        let mut weight_total = 0.0;
        let mut lr_trace = Vec::new();
        let k = self.loss.num_classes();
        for (chunk_index, chunk) in order.chunks(self.cfg.micro_batch).enumerate() {
            let batch = self.inputs.select(chunk);
            let seeds: Vec<u64> = (0..chunk.len())
                .map(|j| derive_seed(self.cfg.seed, &[DROPOUT_STREAM, epoch as u64, (chunk_index * self.cfg.micro_batch + j) as u64]))
                .collect();
            let (logits, caches) = self.model.forward_with_cache(&batch, Some(&seeds));
            if logits.iter().any(|v| !v.is_finite()) {
                return Err(TrainError::NonFiniteLogits);
            }
            let mut d_logits = Array2::zeros((chunk.len(), k));
            for (j, &i) in chunk.iter().enumerate() {
                let w = self.weights[i];
                let (l, g) = self.loss.sample(logits.row(j), self.targets[i]);
                loss_sum += w * l;
                weight_total += w;
                pending_weight += w;
                d_logits.row_mut(j).assign(&(g * w));
            }
            self.model.backward(&caches, &d_logits, &mut grads);
            pending_micro += 1;
            if pending_micro == self.cfg.accumulation_steps {
                self.optimizer_step(&mut grads, pending_weight, &mut lr_trace);
                pending_weight = 0.0;
                pending_micro = 0;
            }
        }
        if pending_micro > 0 {
            self.optimizer_step(&mut grads, pending_weight, &mut lr_trace);
        }
        Ok(EpochStats {
            train_loss: loss_sum / weight_total,
            optimizer_steps: lr_trace.len(),
            lr_trace,
        })
    }
}

/// What the early-stopping rule says after an evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopDecision {
    Improved,
    NoImprovement,
    Stop,
}

/// Patience counter over a metric to maximize. Equal scores do not count as
/// improvement, so the best epoch is the earliest maximum.
#[derive(Debug, Clone)]
pub struct EarlyStopping {
    patience: usize,
    best: Option<(usize, f64)>,
    since_best: usize,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        Self {
            patience,
            best: None,
            since_best: 0,
        }
    }

    pub fn observe(&mut self, epoch: usize, score: f64) -> StopDecision {
        match self.best {
            Some((_, best)) if score <= best => {
                self.since_best += 1;
                if self.since_best >= self.patience {
                    StopDecision::Stop
                } else {
                    StopDecision::NoImprovement
                }
            }
            _ => {
                self.best = Some((epoch, score));
                self.since_best = 0;
                StopDecision::Improved
            }
        }
    }

    pub fn best_epoch(&self) -> Option<usize> {
        self.best.map(|(e, _)| e)
    }

    pub fn best_score(&self) -> Option<f64> {
        self.best.map(|(_, s)| s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub dev_macro_f1: f64,
    pub dev_accuracy: f64,
    pub optimizer_steps: usize,
    pub lr_trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainHistory {
    /// Evaluation-mode training loss before the first update.
    pub initial_train_loss: f64,
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub stopped_early: bool,
}

const HISTORY_HEADER: &str = "epoch\ttrain_loss\tdev_macro_f1\tdev_accuracy\toptimizer_steps\tbest\tlr_trace";

impl TrainHistory {
    pub fn best(&self) -> Option<&EpochRecord> {
        self.epochs.iter().find(|e| e.epoch == self.best_epoch)
    }

    pub fn best_dev_macro_f1(&self) -> f64 {
        self.best().map_or(f64::NAN, |e| e.dev_macro_f1)
    }

    /// One row per epoch; the learning-rate trace is comma-separated.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from(HISTORY_HEADER);
        out.push('\n');
        for e in &self.epochs {
            let trace: Vec<String> = e.lr_trace.iter().map(|v| format!("{v:e}")).collect();
            let _ = writeln!(
                out,
                "{}\t{:.6}\t{:.6}\t{:.6}\t{}\t{}\t{}",
                e.epoch,
                e.train_loss,
                e.dev_macro_f1,
                e.dev_accuracy,
                e.optimizer_steps,
                u8::from(e.epoch == self.best_epoch),
                trace.join(",")
            );
        }
        out
    }

    pub fn write_tsv(&self, path: &Path) -> Result<(), TrainError> {
        std::fs::write(path, self.to_tsv()).map_err(|source| TrainError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Trained model (restored to its best epoch) and the run's history.
pub struct TrainOutcome<E: EncoderBackbone> {
    pub model: ClarityClassifier<E>,
    pub history: TrainHistory,
    pub class_weights: Vec<f64>,
}

/// Rejects dev sets whose labels are all identical: macro F1 on them says
/// nothing, and it is the usual symptom of placeholder labels.
pub fn check_validation_labels(dev: &Dataset, task: Task) -> Result<Vec<usize>, TrainError> {
    if dev.is_empty() {
        return Err(TrainError::EmptyDataset("validation".into()));
    }
    let targets = dev.targets(task)?;
    if targets.iter().all(|&t| t == targets[0]) {
        return Err(TrainError::DegenerateValidation {
            count: targets.len(),
            label: task.label_name(targets[0]).unwrap_or("?").to_string(),
        });
    }
    Ok(targets)
}

/// Train with early stopping on dev macro F1 and return the best epoch's
/// parameters.
pub fn train_loop<E: EncoderBackbone>(
    model: ClarityClassifier<E>,
    train: &Dataset,
    dev: &Dataset,
    cfg: &TrainingConfig,
) -> Result<TrainOutcome<E>, TrainError> {
    let task = model.config().task;
    let dev_targets = check_validation_labels(dev, task)?;
    let mut trainer = Trainer::new(model, train, cfg)?;
    let dev_inputs = trainer.model().encode_pairs(dev.iter());
    let mut history = TrainHistory {
        initial_train_loss: trainer.dataset_loss()?,
        ..TrainHistory::default()
    };
    let mut stopper = EarlyStopping::new(cfg.patience);
    let mut best_params = trainer.model().params().clone();
    for epoch in 1..=cfg.max_epochs {
        let stats = trainer.run_epoch(epoch)?;
        let preds = trainer.model().predict(&dev_inputs);
        let cm = confusion_matrix(&dev_targets, &preds, task.label_names())?;
        let record = EpochRecord {
            epoch,
            train_loss: stats.train_loss,
            dev_macro_f1: macro_f1(&cm),
            dev_accuracy: accuracy(&cm),
            optimizer_steps: stats.optimizer_steps,
            lr_trace: stats.lr_trace,
        };
        log::info!(
            "epoch {epoch}: train loss {:.4}, dev macro F1 {:.4}",
            record.train_loss,
            record.dev_macro_f1
        );
        let decision = stopper.observe(epoch, record.dev_macro_f1);
        history.epochs.push(record);
        match decision {
            StopDecision::Improved => best_params = trainer.model().params().clone(),
            StopDecision::NoImprovement => {}
            StopDecision::Stop => {
                history.stopped_early = true;
                break;
            }
        }
    }
    history.best_epoch = stopper.best_epoch().unwrap_or(0);
    let class_weights = trainer.class_weights().to_vec();
    let mut model = trainer.into_model();
    model.set_params(best_params);
    Ok(TrainOutcome {
        model,
        history,
        class_weights,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::data::{ClarityLabel, QAPair};
    use crate::model::ModelConfig;
    use crate::train::ScheduleKind;

    /// Separable toy corpus: each class has its own answer vocabulary.
    pub(crate) fn toy_corpus(n: usize, prefix: &str) -> Dataset {
        let answers = [
            ("Yes, we will absolutely do that.", ClarityLabel::ClearReply),
            ("Well, perhaps, it depends on many factors.", ClarityLabel::Ambivalent),
            ("I will not comment on that.", ClarityLabel::ClearNonReply),
        ];
        let questions = ["Will you raise taxes?", "Do you support the bill?", "Are you running again?", "Will the plant close?"];
        let records = (0..n)
            .map(|i| {
                let (a, l) = answers[i % 3];
                QAPair::new(format!("{prefix}{i}"), questions[(i / 3) % questions.len()], a)
                    .unwrap()
                    .with_clarity(l)
                    .unwrap()
            })
            .collect();
        Dataset::new(prefix, records)
    }

    pub(crate) fn toy_model(seed: u64, dropout: f64) -> ClarityClassifier {
        ClarityClassifier::new_tiny(ModelConfig {
            vocab_size: 128,
            hidden_width: 8,
            layer_count: 2,
            feature_width: 4,
            dropout,
            max_sequence_length: 32,
            init_seed: seed,
            ..ModelConfig::default()
        })
        .unwrap()
    }

    #[test]
    fn early_stopping_ties_are_not_improvements() {
        let mut s = EarlyStopping::new(3);
        let decisions: Vec<_> = [0.5, 0.5, 0.5, 0.5].iter().enumerate().map(|(i, &f)| s.observe(i + 1, f)).collect();
        assert_eq!(
            decisions,
            vec![StopDecision::Improved, StopDecision::NoImprovement, StopDecision::NoImprovement, StopDecision::Stop]
        );
        assert_eq!(s.best_epoch(), Some(1));

        let mut s = EarlyStopping::new(2);
        for (i, f) in [0.2, 0.6, 0.4, 0.7, 0.7].into_iter().enumerate() {
            assert_ne!(s.observe(i + 1, f), StopDecision::Stop);
        }
        assert_eq!(s.best_epoch(), Some(4));
        assert_eq!(s.observe(6, 0.1), StopDecision::Stop);
    }

    #[test]
    fn constant_dev_labels_abort() {
        let train = toy_corpus(12, "t");
        let dev = Dataset::new(
            "dev",
            (0..5)
                .map(|i| QAPair::new(format!("d{i}"), "Q?", "A.").unwrap().with_clarity(ClarityLabel::ClearReply).unwrap())
                .collect(),
        );
        let Err(err) = train_loop(toy_model(0, 0.1), &train, &dev, &TrainingConfig::default()) else {
            panic!("constant dev labels accepted");
        };
        assert!(matches!(err, TrainError::DegenerateValidation { count: 5, .. }));
        assert!(err.to_string().contains("degenerate validation"));
    }

    #[test]
    fn steps_per_epoch_counts_leftovers() {
        let cfg = TrainingConfig {
            micro_batch: 8,
            accumulation_steps: 4,
            ..TrainingConfig::default()
        };
        // 70 samples → 9 micro-batches → 3 steps (4 + 4 + 1).
        let t = Trainer::new(toy_model(0, 0.0), &toy_corpus(70, "t"), &cfg).unwrap();
        assert_eq!(t.steps_per_epoch(), 3);
        assert_eq!(t.schedule().total_steps, 18);
        assert_eq!(t.schedule().warmup_steps, 3);
    }

    fn one_step_params(micro: usize, accum: usize, dropout: f64) -> ParamStore {
        let train = toy_corpus(32, "t");
        let mut train = train;
        for (i, r) in train.records.iter_mut().enumerate() {
            r.sample_weight = [1.0, 0.7, 0.5][i % 3];
        }
        let cfg = TrainingConfig {
            micro_batch: micro,
            accumulation_steps: accum,
            warmup_fraction: 0.0,
            max_epochs: 1,
            base_lr: 1e-2,
            ..TrainingConfig::default()
        };
        let mut t = Trainer::new(toy_model(5, dropout), &train, &cfg).unwrap();
        let stats = t.run_epoch(1).unwrap();
        assert_eq!(stats.optimizer_steps, 1);
        t.into_model().params().clone()
    }

    #[test]
    fn accumulation_matches_large_batch() {
        for dropout in [0.0, 0.3] {
            let start = toy_model(5, dropout).params().clone();
            let big = one_step_params(32, 1, dropout);
            let accumulated = one_step_params(8, 4, dropout);
            assert!(big.max_abs_diff(&start) > 1e-4, "update must be non-trivial");
            assert!(big.max_abs_diff(&accumulated) < 1e-5);
        }
    }

    #[test]
    fn epoch_order_is_seeded() {
        let cfg = TrainingConfig::default();
        let t = Trainer::new(toy_model(0, 0.1), &toy_corpus(20, "t"), &cfg).unwrap();
        assert_eq!(t.epoch_order(1), t.epoch_order(1));
        assert_ne!(t.epoch_order(1), t.epoch_order(2));
    }

    #[test]
    fn toy_run_learns_and_is_reproducible() {
        let train = toy_corpus(64, "t");
        let dev = toy_corpus(15, "d");
        let cfg = TrainingConfig {
            base_lr: 1e-2,
            micro_batch: 4,
            accumulation_steps: 2,
            max_epochs: 6,
            seed: 7,
            ..TrainingConfig::default()
        };
        let a = train_loop(toy_model(1, 0.1), &train, &dev, &cfg).unwrap();
        let h = &a.history;
        assert!(h.epochs.last().unwrap().train_loss < h.initial_train_loss);
        assert!(h.epochs[1].train_loss < h.epochs[0].train_loss);
        assert_eq!(h.best_dev_macro_f1(), 1.0);
        let best = h.best_epoch;
        assert!(h.epochs[..best - 1].iter().all(|e| e.dev_macro_f1 < 1.0));
        // Restored model reproduces the best epoch's dev score.
        let preds = a.model.predict(&a.model.encode_pairs(dev.iter()));
        assert_eq!(preds, dev.targets(Task::Clarity).unwrap());
        let b = train_loop(toy_model(1, 0.1), &train, &dev, &cfg).unwrap();
        assert_eq!(a.history, b.history);
        assert_eq!(a.model.params(), b.model.params());
        assert!(h.to_tsv().starts_with(HISTORY_HEADER));
        assert_eq!(h.to_tsv().lines().count(), h.epochs.len() + 1);
    }

    #[test]
    fn schedule_kind_is_applied() {
        let cfg = TrainingConfig {
            schedule: ScheduleKind::WarmupLinear,
            warmup_fraction: 0.1,
            micro_batch: 4,
            accumulation_steps: 1,
            max_epochs: 1,
            ..TrainingConfig::default()
        };
        let mut t = Trainer::new(toy_model(0, 0.0), &toy_corpus(40, "t"), &cfg).unwrap();
        let stats = t.run_epoch(1).unwrap();
        assert_eq!(stats.lr_trace.len(), 10);
        assert_eq!(stats.lr_trace[0], 0.0);
        assert!((stats.lr_trace[1] - 3e-5).abs() < 1e-18);
        assert!((stats.lr_trace[5] - 3e-5 * (1.0 - 4.0 / 9.0)).abs() < 1e-15);
    }
}
