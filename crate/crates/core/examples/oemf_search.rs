//! Exhaustive search over band subsets, classifier subsets and aggregator
//! pairs, here restricted to four pairs to keep it quick.
use emf_core::aggregation::AggregatorId as A;
use emf_core::classifiers::ClassifierId;
use emf_core::data::{generate_synthetic, SynthSpec};
use emf_core::dsp::BandName;
use emf_core::eval::{oemf_search, subset_pair_count, AggPairs, ScoreCache, SearchOptions, SplitPlan};
use emf_core::pipeline::{FeatureSet, PipelineConfig};

fn main() {
    let set = generate_synthetic(&SynthSpec { snr: 0.5, erd_depth: 0.3, seed: 5, ..SynthSpec::default() }).unwrap();
    let cfg = PipelineConfig::default();
    let features = FeatureSet::from_trials(&set.trials, &cfg, &BandName::ALL, set.n_classes()).unwrap();
    let cache = ScoreCache::build(&features, &cfg, &SplitPlan::kfold(5, 0), &BandName::ALL, &ClassifierId::ALL).unwrap();

    let options = SearchOptions {
        agg_pairs: AggPairs::List(vec![(A::Mean, A::Mean), (A::Choquet, A::Min), (A::Sugeno, A::Max), (A::Owa2, A::Median)]),
        top_n: 10,
        ..SearchOptions::default()
    };
    let report = oemf_search(&cache, &options).unwrap();
    println!(
        "{} subset pairs (6 bands, 5 classifiers: {}) x {} aggregator pairs",
        report.subset_pairs,
        subset_pair_count(6, 5),
        report.agg_pairs
    );
    print!("{}", report.to_csv());
}
