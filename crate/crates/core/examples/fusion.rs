//! Traditional, MFF and EMF fusion of a hand-written score table.
use emf_core::aggregation::AggregatorId;
use emf_core::classifiers::{ClassifierId, ScoreVector};
use emf_core::dsp::BandName;
use emf_core::fusion::{fuse, FusionConfig, FusionMode, ScoreTensor};

fn main() {
    let bands = vec![BandName::Alpha, BandName::Beta, BandName::Smr];
    let clfs = vec![ClassifierId::Lda, ClassifierId::Knn];
    let s = |p: f64| ScoreVector::from_normalized(vec![p, 1.0 - p]);
    // One classifier is confidently wrong in beta.
    let table = vec![vec![s(0.7), s(0.6)], vec![s(0.05), s(0.55)], vec![s(0.65), s(0.6)]];
    let tensor = ScoreTensor::from_nested(bands.clone(), clfs.clone(), &table).unwrap();

    let configs = [
        FusionConfig::traditional(&bands, &clfs),
        FusionConfig { mode: FusionMode::Mff, ..FusionConfig::emf(&bands, &clfs, AggregatorId::Median, AggregatorId::Median) },
        FusionConfig::emf(&bands, &clfs, AggregatorId::Choquet, AggregatorId::Min),
        FusionConfig::emf(&bands, &clfs, AggregatorId::Median, AggregatorId::Max),
    ];
    for cfg in configs {
        let cfg = cfg.validated().unwrap();
        let out = fuse(&tensor, &cfg).unwrap();
        println!(
            "{:?} {}/{}: scores {:.3?} -> class {}",
            cfg.mode,
            cfg.freq_agg,
            cfg.class_agg,
            out.scores.as_slice(),
            out.label
        );
    }
}
