mod common;

use emf_core::aggregation::AggregatorId as A;
use emf_core::classifiers::ClassifierId;
use emf_core::dsp::BandName;
use emf_core::eval::{
    aggregator_grid, evaluate_split, oemf_search, run_cv, AggPairs, SearchOptions, SplitPlan,
};
use emf_core::fusion::FusionConfig;
use emf_core::pipeline::{PipelineConfig, PipelineModel};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn shuffled_labels_score_near_chance() {
    let set = common::synth(200, 0.8, 4.0, 21);
    let cfg = PipelineConfig::default();
    let mut features = common::features(&set, &cfg);
    features.labels.shuffle(&mut ChaCha8Rng::seed_from_u64(1));
    let cache = common::cache(&features, &cfg, &SplitPlan::kfold(5, 0));
    let acc = cache.evaluate(&FusionConfig::default()).unwrap().mean;
    assert!((0.4..=0.6).contains(&acc), "{acc}");
}

#[test]
fn mean_mean_grid_cell_equals_an_independent_run() {
    let set = common::synth(120, 0.5, 1.0, 3);
    let plan = SplitPlan::kfold(5, 4);
    let cfg = PipelineConfig {
        fusion: FusionConfig::emf(&BandName::ALL, &ClassifierId::ALL, A::Mean, A::Mean),
        seed: 8,
        ..PipelineConfig::default()
    };
    let cache = common::cache(&common::features(&set, &cfg), &cfg, &plan);
    let grid = aggregator_grid(&cache, &BandName::ALL, &ClassifierId::ALL, Default::default()).unwrap();
    assert_eq!(grid.matrix.len(), 17);
    assert!(grid.matrix.iter().all(|r| r.len() == 17 && r.iter().all(|v| (0.0..=1.0).contains(v))));
    let direct = run_cv(&set, &cfg, &plan).unwrap();
    assert_eq!(grid.cell(A::Mean, A::Mean), direct.mean);
    assert!(grid.best.2 >= grid.cell(A::Mean, A::Mean));
    for (f, g) in [(A::Choquet, A::Min), (A::Sugeno, A::So), (A::Cf, A::Owa2)] {
        let cell_cfg = PipelineConfig {
            fusion: FusionConfig::emf(&BandName::ALL, &ClassifierId::ALL, f, g),
            ..cfg.clone()
        };
        assert_eq!(grid.cell(f, g), run_cv(&set, &cell_cfg, &plan).unwrap().mean, "{f}/{g}");
    }
}

#[test]
fn identical_seeds_reproduce_bit_for_bit() {
    let set = common::synth(80, 0.6, 2.0, 5);
    let plan = SplitPlan::kfold(4, 6);
    let cfg = PipelineConfig { seed: 2, ..PipelineConfig::default() };
    assert_eq!(plan.splits(&set.labels(), 2).unwrap(), plan.splits(&set.labels(), 2).unwrap());
    let a = run_cv(&set, &cfg, &plan).unwrap();
    let b = run_cv(&set, &cfg, &plan).unwrap();
    assert_eq!(a, b);
    let other = SplitPlan::kfold(4, 7).splits(&set.labels(), 2).unwrap();
    assert_ne!(plan.splits(&set.labels(), 2).unwrap(), other);
}

#[test]
fn swapping_train_and_test_changes_the_models() {
    let set = common::synth(60, 0.8, 4.0, 9);
    let cfg = PipelineConfig::default();
    let features = common::features(&set, &cfg);
    let split = &SplitPlan::kfold(2, 0).splits(&features.labels, 2).unwrap()[0];
    let a = PipelineModel::fit(&features, &split.train, &cfg, &BandName::ALL, &ClassifierId::ALL).unwrap();
    let b = PipelineModel::fit(&features, &split.test, &cfg, &BandName::ALL, &ClassifierId::ALL).unwrap();
    assert_ne!(a.csp, b.csp);
    assert_ne!(a.models, b.models);
}

/// Scales channel C3 by 10 in every band of class-1 trials.
fn plant(series: &mut [nalgebra::DMatrix<f64>]) {
    for m in series {
        m.row_mut(0).scale_mut(10.0);
    }
}

#[test]
fn test_only_association_is_not_exploited() {
    let set = common::synth(100, 0.0, 4.0, 31);
    let cfg = PipelineConfig::default();
    let clean = common::features(&set, &cfg);
    for seed in 0..3 {
        let split = &SplitPlan::kfold(5, seed).splits(&clean.labels, 2).unwrap()[0];
        let mut canary = clean.clone();
        for &i in &split.test {
            if canary.labels[i] == 1 {
                plant(&mut canary.series[i]);
            }
        }
        let scores = evaluate_split(&canary, &cfg, &split.train, &split.test, &BandName::ALL, &ClassifierId::ALL).unwrap();
        let hits = scores
            .tensors
            .iter()
            .zip(&scores.labels)
            .filter(|(t, &l)| emf_core::fusion::fuse(t, &cfg.fusion).unwrap().label == l)
            .count();
        let acc = hits as f64 / split.test.len() as f64;
        assert!(acc < 1.0, "seed {seed}: test-only feature reached {acc}");

        // The same association in the training view is found.
        let mut visible = clean.clone();
        for i in 0..visible.len() {
            if visible.labels[i] == 1 {
                plant(&mut visible.series[i]);
            }
        }
        let scores = evaluate_split(&visible, &cfg, &split.train, &split.test, &BandName::ALL, &ClassifierId::ALL).unwrap();
        let hits = scores
            .tensors
            .iter()
            .zip(&scores.labels)
            .filter(|(t, &l)| emf_core::fusion::fuse(t, &cfg.fusion).unwrap().label == l)
            .count();
        assert!(hits as f64 / split.test.len() as f64 >= 0.95, "seed {seed}: control missed the planted feature");
    }
}

#[test]
fn search_report_is_sorted_with_the_documented_tie_break() {
    let set = common::synth(80, 0.3, 0.5, 13);
    let cfg = PipelineConfig::default();
    let features = common::features(&set, &cfg);
    let bands = [BandName::Alpha, BandName::Beta, BandName::All];
    let clfs = [ClassifierId::Lda, ClassifierId::Knn, ClassifierId::Svm];
    let cache = emf_core::eval::ScoreCache::build(&features, &cfg, &SplitPlan::kfold(4, 1), &bands, &clfs).unwrap();
    let options = SearchOptions {
        bands: bands.to_vec(),
        classifiers: clfs.to_vec(),
        agg_pairs: AggPairs::List(vec![(A::Mean, A::Mean), (A::Choquet, A::Min), (A::Max, A::Hm)]),
        top_n: usize::MAX,
        ..SearchOptions::default()
    };
    let report = oemf_search(&cache, &options).unwrap();
    assert_eq!(report.subset_pairs, 49);
    assert_eq!(report.len(), 49 * 3);
    let entries: Vec<_> = (1..=report.len()).map(|r| report.entry(r).unwrap()).collect();
    for w in entries.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        assert!(a.accuracy >= b.accuracy);
        if a.accuracy == b.accuracy {
            let key = |e: &emf_core::eval::SearchEntry| (e.classifiers.len(), e.bands.len());
            assert!(key(a) <= key(b), "{a:?} before {b:?}");
        }
    }
    // Every entry agrees with a direct evaluation of its config.
    for e in entries.iter().step_by(7) {
        let direct = cache.evaluate(&e.fusion_config()).unwrap();
        assert_eq!(direct.mean, e.accuracy);
        assert_eq!(report.accuracy_of(&e.fusion_config()), Some(e.accuracy));
    }

    let two = SearchOptions {
        bands: vec![BandName::Alpha, BandName::Beta],
        classifiers: vec![ClassifierId::Lda, ClassifierId::Knn],
        agg_pairs: AggPairs::List(vec![(A::Mean, A::Mean)]),
        top_n: 100,
        ..SearchOptions::default()
    };
    assert_eq!(oemf_search(&cache, &two).unwrap().len(), 9);
}

#[test]
fn single_member_pipeline_is_blind_to_the_aggregator_pair() {
    let set = common::synth(200, 0.8, 4.0, 6);
    let cfg = PipelineConfig::default();
    let features = common::features(&set, &cfg);
    let cache = emf_core::eval::ScoreCache::build(
        &features,
        &cfg,
        &SplitPlan::kfold(5, 0),
        &[BandName::Alpha],
        &[ClassifierId::Lda],
    )
    .unwrap();
    let base = cache.evaluate(&FusionConfig::emf(&[BandName::Alpha], &[ClassifierId::Lda], A::Mean, A::Mean)).unwrap();
    for f in A::ALL {
        for g in A::ALL {
            let out = cache.evaluate(&FusionConfig::emf(&[BandName::Alpha], &[ClassifierId::Lda], f, g)).unwrap();
            assert_eq!(out.predictions, base.predictions, "{f}/{g}");
        }
    }
}
