//! Cross-validation, metrics, aggregator grids and the exhaustive search.
//!
//! Every evaluation goes through a [`ScoreCache`]: base-classifier score
//! tensors of each test trial, per split, fitted on that split's training
//! trials only. Fusion is then pure arithmetic on the cache, so a grid cell
//! or search entry reproduces an independent [`run_cv`] exactly.

mod metrics;
mod search;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifiers::ClassifierId;
use crate::data::TrialSet;
use crate::dsp::BandName;
use crate::fusion::{fuse, FusionConfig, ScoreTensor};
use crate::pipeline::{FeatureSet, PipelineConfig, PipelineError, PipelineModel};
use crate::util::derive_seed;

pub use metrics::{itr, q_statistic, ContingencyCounts, ItrInput, ItrOutput};
pub use search::{
    aggregator_grid, oemf_search, subset_pair_count, AggPairs, GridResult, SearchEntry, SearchOptions, SearchReport,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("split error: {0}")]
    Split(String),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, EvalError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SplitKind {
    Kfold { k: usize },
    RepeatedHoldout { reps: usize, train_frac: f64 },
}

/// How trials are partitioned into train/test splits. Always stratified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    #[serde(flatten)]
    pub kind: SplitKind,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

impl SplitPlan {
    pub fn kfold(k: usize, seed: u64) -> Self {
        Self {
            kind: SplitKind::Kfold { k },
            seed,
        }
    }

    pub fn repeated_holdout(reps: usize, train_frac: f64, seed: u64) -> Self {
        Self {
            kind: SplitKind::RepeatedHoldout { reps, train_frac },
            seed,
        }
    }

    /// Stratified splits of trials with the given labels. Each training
    /// side keeps at least two trials of every class, and each test side
    /// at least one trial.
    pub fn splits(&self, labels: &[usize], n_classes: usize) -> Result<Vec<Split>> {
        let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
        for (i, &l) in labels.iter().enumerate() {
            if l >= n_classes {
                return Err(EvalError::Split(format!("label {l} outside 0..{n_classes}")));
            }
            by_class[l].push(i);
        }
        let splits = match self.kind {
            SplitKind::Kfold { k } => {
                if k < 2 {
                    return Err(EvalError::Split(format!("k must be >= 2, got {k}")));
                }
                let mut fold_of = vec![0usize; labels.len()];
                let mut offset = 0;
                for (class, members) in by_class.iter_mut().enumerate() {
                    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, &[class as u64]));
                    members.shuffle(&mut rng);
                    for (j, &i) in members.iter().enumerate() {
                        fold_of[i] = (offset + j) % k;
                    }
                    offset += members.len();
                }
                (0..k)
                    .map(|f| Split {
                        train: (0..labels.len()).filter(|&i| fold_of[i] != f).collect(),
                        test: (0..labels.len()).filter(|&i| fold_of[i] == f).collect(),
                    })
                    .collect::<Vec<_>>()
            }
            SplitKind::RepeatedHoldout { reps, train_frac } => {
                if reps == 0 || !(train_frac > 0.0 && train_frac < 1.0) {
                    return Err(EvalError::Split(format!(
                        "need reps >= 1 and 0 < train_frac < 1, got {reps} and {train_frac}"
                    )));
                }
                (0..reps)
                    .map(|r| {
                        let mut in_train = vec![false; labels.len()];
                        for (class, members) in by_class.iter().enumerate() {
                            let mut m = members.clone();
                            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, &[r as u64, class as u64]));
                            m.shuffle(&mut rng);
                            let n_train = (train_frac * m.len() as f64).round() as usize;
                            for &i in &m[..n_train.min(m.len())] {
                                in_train[i] = true;
                            }
                        }
                        Split {
                            train: (0..labels.len()).filter(|&i| in_train[i]).collect(),
                            test: (0..labels.len()).filter(|&i| !in_train[i]).collect(),
                        }
                    })
                    .collect()
            }
        };
        for (s, split) in splits.iter().enumerate() {
            if split.test.is_empty() {
                return Err(EvalError::Split(format!("split {s} has an empty test side")));
            }
            for class in 0..n_classes {
                let n = split.train.iter().filter(|&&i| labels[i] == class).count();
                if n < 2 {
                    return Err(EvalError::Split(format!(
                        "split {s}: class {class} has {n} training trials; stratification needs at least 2"
                    )));
                }
            }
        }
        Ok(splits)
    }
}

/// Base scores of one split's test trials.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitScores {
    pub test: Vec<usize>,
    pub labels: Vec<usize>,
    pub tensors: Vec<ScoreTensor>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreCache {
    pub bands: Vec<BandName>,
    pub classifiers: Vec<ClassifierId>,
    pub n_classes: usize,
    pub splits: Vec<SplitScores>,
}

impl ScoreCache {
    /// Fits every `(band, classifier)` pair on each split's training side
    /// and scores its test side. Split `s` uses seed
    /// `derive_seed(cfg.seed, [s])`.
    pub fn build(
        features: &FeatureSet,
        cfg: &PipelineConfig,
        plan: &SplitPlan,
        bands: &[BandName],
        classifiers: &[ClassifierId],
    ) -> Result<Self> {
        let mut bands = bands.to_vec();
        let mut classifiers = classifiers.to_vec();
        bands.sort();
        bands.dedup();
        classifiers.sort();
        classifiers.dedup();
        if bands.is_empty() || classifiers.is_empty() {
            return Err(EvalError::InvalidInput("empty band or classifier set".into()));
        }
        let splits = plan.splits(&features.labels, features.n_classes)?;
        let scored = splits
            .par_iter()
            .enumerate()
            .map(|(s, split)| {
                let split_cfg = PipelineConfig {
                    seed: derive_seed(cfg.seed, &[s as u64]),
                    ..cfg.clone()
                };
                evaluate_split(features, &split_cfg, &split.train, &split.test, &bands, &classifiers)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            bands,
            classifiers,
            n_classes: features.n_classes,
            splits: scored,
        })
    }

    pub fn trials(&self) -> usize {
        self.splits.iter().map(|s| s.test.len()).sum()
    }

    /// Fuses every cached tensor under `cfg` and scores the decisions.
    pub fn evaluate(&self, cfg: &FusionConfig) -> Result<CvResult> {
        let cfg = cfg.clone().validated().map_err(PipelineError::from)?;
        let mut accuracies = Vec::with_capacity(self.splits.len());
        let mut predictions = Vec::with_capacity(self.trials());
        let mut fallbacks = 0;
        for split in &self.splits {
            let mut correct = 0usize;
            for (j, t) in split.tensors.iter().enumerate() {
                let fused = fuse(t, &cfg).map_err(PipelineError::from)?;
                fallbacks += fused.fallbacks;
                correct += usize::from(fused.label == split.labels[j]);
                predictions.push(Prediction {
                    trial: split.test[j],
                    label: split.labels[j],
                    predicted: fused.label,
                });
            }
            accuracies.push(correct as f64 / split.test.len() as f64);
        }
        let (mean, std) = mean_std(&accuracies);
        let members = self.member_correctness(&cfg.bands, &cfg.classifiers);
        Ok(CvResult {
            config: cfg,
            accuracies,
            mean,
            std,
            fallbacks,
            predictions,
            members,
        })
    }

    /// Per base classifier, whether its own argmax was right on each test
    /// trial (splits concatenated).
    pub fn member_correctness(&self, bands: &[BandName], classifiers: &[ClassifierId]) -> Vec<MemberRecord> {
        let mut out = Vec::new();
        for &band in bands {
            let Some(b) = self.bands.iter().position(|&x| x == band) else { continue };
            for &id in classifiers {
                let Some(c) = self.classifiers.iter().position(|&x| x == id) else { continue };
                let correct = self
                    .splits
                    .iter()
                    .flat_map(|s| {
                        s.tensors
                            .iter()
                            .zip(&s.labels)
                            .map(move |(t, &l)| crate::classifiers::argmax(t.get(b, c)) == l)
                    })
                    .collect();
                out.push(MemberRecord {
                    band,
                    classifier: id,
                    correct,
                });
            }
        }
        out
    }
}

/// Fits on `train` and returns the base scores of `test`. CSP and
/// classifiers never see the test trials.
pub fn evaluate_split(
    features: &FeatureSet,
    cfg: &PipelineConfig,
    train: &[usize],
    test: &[usize],
    bands: &[BandName],
    classifiers: &[ClassifierId],
) -> Result<SplitScores> {
    let model = PipelineModel::fit(features, train, cfg, bands, classifiers)?;
    let tensors = test
        .iter()
        .map(|&i| model.score_tensor(features, i))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(SplitScores {
        test: test.to_vec(),
        labels: test.iter().map(|&i| features.labels[i]).collect(),
        tensors,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub trial: usize,
    pub label: usize,
    pub predicted: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemberRecord {
    pub band: BandName,
    pub classifier: ClassifierId,
    pub correct: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub config: FusionConfig,
    /// Test accuracy of each split, in split order.
    pub accuracies: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation across splits (0 for a single split).
    pub std: f64,
    /// Phase outputs that fell back to uniform scores.
    pub fallbacks: usize,
    pub predictions: Vec<Prediction>,
    pub members: Vec<MemberRecord>,
}

pub(crate) fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, std)
}

/// Cross-validates `cfg` on precomputed features.
pub fn run_cv_features(features: &FeatureSet, cfg: &PipelineConfig, plan: &SplitPlan) -> Result<CvResult> {
    let cache = ScoreCache::build(features, cfg, plan, &cfg.fusion.bands, &cfg.fusion.classifiers)?;
    cache.evaluate(&cfg.fusion)
}

/// Cross-validates the full pipeline on raw trials.
pub fn run_cv(set: &TrialSet, cfg: &PipelineConfig, plan: &SplitPlan) -> Result<CvResult> {
    let features = FeatureSet::from_trials(&set.trials, cfg, &cfg.fusion.bands, set.n_classes())?;
    run_cv_features(&features, cfg, plan)
}
