#![allow(dead_code)]

use emf_core::classifiers::ClassifierId;
use emf_core::data::{generate_synthetic, SynthSpec, TrialSet};
use emf_core::dsp::BandName;
use emf_core::eval::{ScoreCache, SplitPlan};
use emf_core::pipeline::{FeatureSet, PipelineConfig};

pub fn synth(trials: usize, erd_depth: f64, snr: f64, seed: u64) -> TrialSet {
    generate_synthetic(&SynthSpec {
        trials_per_class: trials / 2,
        erd_depth,
        snr,
        seed,
        ..SynthSpec::default()
    })
    .unwrap()
}

pub fn features(set: &TrialSet, cfg: &PipelineConfig) -> FeatureSet {
    FeatureSet::from_trials(&set.trials, cfg, &BandName::ALL, set.n_classes()).unwrap()
}

pub fn cache(features: &FeatureSet, cfg: &PipelineConfig, plan: &SplitPlan) -> ScoreCache {
    ScoreCache::build(features, cfg, plan, &BandName::ALL, &ClassifierId::ALL).unwrap()
}

/// Area under the ROC curve of `pos` over `neg` (Mann-Whitney, ties half).
pub fn auc(pos: &[f64], neg: &[f64]) -> f64 {
    let mut wins = 0.0;
    for &p in pos {
        for &n in neg {
            wins += if p > n {
                1.0
            } else if p == n {
                0.5
            } else {
                0.0
            };
        }
    }
    wins / (pos.len() * neg.len()) as f64
}
