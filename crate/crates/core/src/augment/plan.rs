//! How many synthetic records each class needs, and running a plan against
//! a training split.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::casa::casa_generate;
use super::eda::eda_augment;
use super::frames::{extract_frames, whole_answer_frames};
use super::{AugmentError, AugmentResources, GeneratorClient};
use crate::data::{ClarityLabel, Dataset, Distribution, QAPair, Source, Task};
use crate::rng::{child_rng, derive_seed};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BalanceMode {
    /// Raise every class to the largest class count.
    FullBalance,
    /// Explicit post-augmentation counts; unlisted classes stay as they are.
    Partial(BTreeMap<ClarityLabel, usize>),
}

/// Records to generate per class (every class present, possibly 0).
pub fn balance_plan(dist: &Distribution, mode: &BalanceMode) -> Result<BTreeMap<ClarityLabel, usize>, AugmentError> {
    if dist.task != Task::Clarity {
        return Err(AugmentError::InvalidPlan("balance plans are defined over clarity labels".into()));
    }
    let current: BTreeMap<ClarityLabel, usize> = dist.by_clarity().into_iter().map(|(l, s)| (l, s.count)).collect();
    let targets: BTreeMap<ClarityLabel, usize> = match mode {
        BalanceMode::FullBalance => {
            let max = current.values().copied().max().unwrap_or(0);
            current.keys().map(|&l| (l, max)).collect()
        }
        BalanceMode::Partial(t) => current.iter().map(|(&l, &n)| (l, t.get(&l).copied().unwrap_or(n))).collect(),
    };
    targets
        .into_iter()
        .map(|(label, target)| {
            let have = current[&label];
            if target < have {
                Err(AugmentError::TargetBelowCurrent { label, target, current: have })
            } else {
                Ok((label, target - have))
            }
        })
        .collect()
}

/// Records eligible as augmentation input. Construction fails on any record
/// marked as coming from a held-out split, so test or evaluation data
/// cannot leak into generated training data.
#[derive(Debug, Clone)]
pub struct TrainingSplit(Dataset);

const HELD_OUT_SPLITS: &[&str] = &["test", "eval", "evaluation", "heldout", "held_out"];

impl TrainingSplit {
    pub fn new(d: Dataset) -> Result<Self, AugmentError> {
        for r in d.iter() {
            if let Some(split) = r.meta.get("split") {
                if HELD_OUT_SPLITS.contains(&split.trim().to_ascii_lowercase().as_str()) {
                    return Err(AugmentError::HeldOut {
                        id: r.id.clone(),
                        split: split.clone(),
                    });
                }
            }
        }
        Ok(Self(d))
    }

    pub fn dataset(&self) -> &Dataset {
        &self.0
    }

    /// Original (non-synthetic) records of `label`.
    pub fn originals(&self, label: ClarityLabel) -> Vec<&QAPair> {
        self.0.iter().filter(|r| r.source == Source::Original && r.clarity == Some(label)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentationPlan {
    /// Post-augmentation count per class.
    pub targets: BTreeMap<ClarityLabel, usize>,
    /// Per-token probability for the lexical operations.
    pub op_probability: f64,
    /// Which generator to use, and which provenance to stamp.
    pub source: Source,
    pub seed: u64,
    /// Minimum support for mined frames.
    pub min_frame_support: usize,
}

impl AugmentationPlan {
    pub fn from_balance(dist: &Distribution, mode: &BalanceMode, source: Source, seed: u64) -> Result<Self, AugmentError> {
        let needed = balance_plan(dist, mode)?;
        let current = dist.by_clarity();
        Ok(Self {
            targets: needed.iter().map(|(&l, &n)| (l, n + current[&l].count)).collect(),
            op_probability: 0.1,
            source,
            seed,
            min_frame_support: 1,
        })
    }

    pub fn validate(&self) -> Result<(), AugmentError> {
        if !(0.0..1.0).contains(&self.op_probability) {
            return Err(AugmentError::InvalidPlan(format!("op probability {} outside [0, 1)", self.op_probability)));
        }
        if !self.source.is_synthetic() {
            return Err(AugmentError::InvalidPlan("plan source must be a synthetic source".into()));
        }
        Ok(())
    }
}

/// Generated records only (originals are not included), in label order then
/// index order. Generation reads nothing but `split`.
pub fn run_plan(
    split: &TrainingSplit,
    plan: &AugmentationPlan,
    resources: &AugmentResources,
    client: Option<&dyn GeneratorClient>,
) -> Result<Dataset, AugmentError> {
    plan.validate()?;
    let mut current: BTreeMap<ClarityLabel, usize> = BTreeMap::new();
    for r in split.dataset().iter() {
        if let Some(l) = r.clarity {
            *current.entry(l).or_default() += 1;
        }
    }
    let mut out = Vec::new();
    for (&label, &target) in &plan.targets {
        let have = current.get(&label).copied().unwrap_or(0);
        if target < have {
            return Err(AugmentError::TargetBelowCurrent { label, target, current: have });
        }
        let need = target - have;
        if need == 0 {
            continue;
        }
        let seeds = split.originals(label);
        let label_seed = derive_seed(plan.seed, &[label.code() as u64]);
        let slug = label.name().to_ascii_lowercase().replace([' ', '-'], "_");
        match plan.source {
            Source::FrameSynthetic => {
                let originals = Dataset::new("originals", seeds.into_iter().cloned().collect());
                let mut frames = extract_frames(&originals, label, &resources.slot_anchors, plan.min_frame_support);
                if frames.is_empty() {
                    frames = whole_answer_frames(&originals, label);
                }
                if frames.is_empty() && client.is_none() {
                    return Err(AugmentError::NoSeedRecords(label));
                }
                log::info!("{label}: {} frames, generating {need}", frames.len());
                out.extend(casa_generate(&frames, resources, need, client, label_seed, &format!("casa_{slug}_"))?);
            }
            Source::ParaphraseSynthetic => {
                if seeds.is_empty() {
                    return Err(AugmentError::NoSeedRecords(label));
                }
                let generated: Vec<QAPair> = (0..need)
                    .into_par_iter()
                    .map(|i| {
                        let seed_record = seeds[i % seeds.len()];
                        let mut rng = child_rng(label_seed, &[i as u64]);
                        let mut p = eda_augment(seed_record, plan.op_probability, &resources.thesaurus, &mut rng);
                        p.id = format!("eda_{slug}_{i}");
                        p
                    })
                    .collect();
                out.extend(generated);
            }
            Source::Original => unreachable!("validated"),
        }
    }
    Ok(Dataset::new("synthetic", out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_dist() -> Distribution {
        // code order: ClearReply, Ambivalent, ClearNonReply
        Distribution::from_counts(Task::Clarity, &[1052, 2040, 356])
    }

    #[test]
    fn full_balance_reference() {
        let plan = balance_plan(&reference_dist(), &BalanceMode::FullBalance).unwrap();
        assert_eq!(plan[&ClarityLabel::ClearReply], 988);
        assert_eq!(plan[&ClarityLabel::ClearNonReply], 1684);
        assert_eq!(plan[&ClarityLabel::Ambivalent], 0);
        assert_eq!(plan.values().sum::<usize>(), 2672);
        assert_eq!(plan.values().sum::<usize>() + 3448, 6120);
    }

    #[test]
    fn partial_reference() {
        let targets = BTreeMap::from([(ClarityLabel::ClearReply, 1498), (ClarityLabel::ClearNonReply, 996)]);
        let plan = balance_plan(&reference_dist(), &BalanceMode::Partial(targets)).unwrap();
        assert_eq!((plan[&ClarityLabel::ClearReply], plan[&ClarityLabel::ClearNonReply]), (446, 640));
        assert_eq!(plan.values().sum::<usize>(), 1086);
        assert_eq!(3448 + 1086, 4534);
    }

    #[test]
    fn balanced_and_invalid_targets() {
        let d = Distribution::from_counts(Task::Clarity, &[5, 5, 5]);
        assert!(balance_plan(&d, &BalanceMode::FullBalance).unwrap().values().all(|&n| n == 0));
        let low = BTreeMap::from([(ClarityLabel::Ambivalent, 10)]);
        assert!(matches!(
            balance_plan(&reference_dist(), &BalanceMode::Partial(low)),
            Err(AugmentError::TargetBelowCurrent { target: 10, current: 2040, .. })
        ));
    }

    fn small_split() -> Dataset {
        let rows = [
            ("Yes, we will pass the bill.", ClarityLabel::ClearReply),
            ("Absolutely, I support the tax cut.", ClarityLabel::ClearReply),
            ("Well, it depends on the committee.", ClarityLabel::Ambivalent),
            ("We are looking at options on trade.", ClarityLabel::Ambivalent),
            ("We are thinking about the future.", ClarityLabel::Ambivalent),
            ("I cannot comment on the investigation.", ClarityLabel::ClearNonReply),
        ];
        Dataset::new(
            "train",
            rows.iter()
                .enumerate()
                .map(|(i, (a, l))| QAPair::new(format!("o{i}"), "What about it?", *a).unwrap().with_clarity(*l).unwrap())
                .collect(),
        )
    }

    #[test]
    fn run_plan_fills_targets_with_stamped_records() {
        let split = TrainingSplit::new(small_split()).unwrap();
        let dist = crate::data::class_distribution(split.dataset()).unwrap();
        let r = AugmentResources::bundled();
        for source in [Source::FrameSynthetic, Source::ParaphraseSynthetic] {
            let plan = AugmentationPlan::from_balance(&dist, &BalanceMode::FullBalance, source, 3).unwrap();
            let out = run_plan(&split, &plan, &r, None).unwrap();
            assert_eq!(out.len(), 1 + 2);
            assert!(out.iter().all(|p| p.source == source && p.sample_weight == crate::data::assign_sample_weights(source)));
            assert_eq!(out.iter().filter(|p| p.clarity == Some(ClarityLabel::ClearNonReply)).count(), 2);
            let again = run_plan(&split, &plan, &r, None).unwrap();
            assert_eq!(out.records, again.records);
            let ids: std::collections::BTreeSet<_> = out.iter().map(|p| p.id.clone()).collect();
            assert_eq!(ids.len(), out.len());
        }
    }

    #[test]
    fn held_out_records_are_refused() {
        let mut d = small_split();
        d.records[2].meta.insert("split".into(), "test".into());
        assert!(matches!(TrainingSplit::new(d), Err(AugmentError::HeldOut { .. })));
        let mut d = small_split();
        d.records[2].meta.insert("split".into(), "train".into());
        assert!(TrainingSplit::new(d).is_ok());
    }

    #[test]
    fn synthetic_inputs_are_never_seeds() {
        let mut d = small_split();
        d.records.push(
            QAPair::new("s0", "Q?", "Synthetic text about nothing.")
                .unwrap()
                .with_clarity(ClarityLabel::ClearNonReply)
                .unwrap()
                .with_source(Source::FrameSynthetic),
        );
        let split = TrainingSplit::new(d).unwrap();
        let plan = AugmentationPlan {
            targets: BTreeMap::from([(ClarityLabel::ClearNonReply, 10)]),
            op_probability: 0.1,
            source: Source::ParaphraseSynthetic,
            seed: 1,
            min_frame_support: 1,
        };
        let out = run_plan(&split, &plan, &AugmentResources::bundled(), None).unwrap();
        assert_eq!(out.len(), 8);
        assert!(out.iter().all(|p| p.meta["derived_from"] == "o5"));
    }
}
