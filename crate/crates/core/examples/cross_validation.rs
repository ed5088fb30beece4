//! Five-fold cross-validation of the full pipeline on synthetic data, for
//! the default EMF config and the traditional LDA baseline.
use emf_core::classifiers::ClassifierId;
use emf_core::data::{generate_synthetic, SynthSpec};
use emf_core::dsp::BandName;
use emf_core::eval::{ScoreCache, SplitPlan};
use emf_core::fusion::FusionConfig;
use emf_core::pipeline::{FeatureSet, PipelineConfig};

fn main() {
    let set = generate_synthetic(&SynthSpec { snr: 1.0, erd_depth: 0.4, seed: 11, ..SynthSpec::default() }).unwrap();
    let cfg = PipelineConfig::default();
    let features = FeatureSet::from_trials(&set.trials, &cfg, &BandName::ALL, set.n_classes()).unwrap();
    let plan = SplitPlan::kfold(5, 0);
    let cache = ScoreCache::build(&features, &cfg, &plan, &BandName::ALL, &ClassifierId::ALL).unwrap();

    let emf = cache.evaluate(&FusionConfig::default()).unwrap();
    println!("emf choquet/min      {:.4} ± {:.4}  folds {:.3?}", emf.mean, emf.std, emf.accuracies);
    let lda = cache.evaluate(&FusionConfig::traditional(&BandName::ALL, &[ClassifierId::Lda])).unwrap();
    println!("traditional lda      {:.4} ± {:.4}  folds {:.3?}", lda.mean, lda.std, lda.accuracies);
    for band in BandName::ALL {
        let r = cache.evaluate(&FusionConfig::traditional(&[band], &[ClassifierId::Lda])).unwrap();
        println!("  lda on {:<6}       {:.4}", band.token(), r.mean);
    }
}
