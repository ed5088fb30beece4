mod common;

use emf_core::classifiers::{predict_scores, ClassifierId};
use emf_core::csp::{fit_csp_ovr, LabeledSeries};
use emf_core::data::{load_bundle, load_bundle_for, save_bundle, Bundle, DataError, CHANNELS};
use emf_core::dsp::{BandName, DspConfig};
use emf_core::eval::{run_cv, SplitPlan};
use emf_core::pipeline::{compute_powers, FeatureSet, PipelineConfig, PipelineModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn no_erd_means_chance_accuracy() {
    let set = common::synth(200, 0.0, 4.0, 17);
    let acc = run_cv(&set, &PipelineConfig::default(), &SplitPlan::kfold(5, 0)).unwrap().mean;
    assert!((0.4..=0.6).contains(&acc), "{acc}");
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (m, (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt())
}

#[test]
fn left_hand_trials_keep_mu_on_c3() {
    let set = common::synth(200, 0.8, 4.0, 4);
    let powers = compute_powers(&set.trials, DspConfig::default(), &[BandName::Alpha]).unwrap();
    let left: Vec<_> = powers.iter().filter(|p| p.label == 0).collect();
    let c3: Vec<f64> = left.iter().map(|p| p.bands[0].power.row(0).mean()).collect();
    let c4: Vec<f64> = left.iter().map(|p| p.bands[0].power.row(1).mean()).collect();
    assert_eq!((CHANNELS[0], CHANNELS[1]), ("C3", "C4"));
    let (m3, s3) = mean_sd(&c3);
    let (m4, s4) = mean_sd(&c4);
    let d = (m3 - m4) / ((s3 * s3 + s4 * s4) / 2.0).sqrt();
    assert!(d > 1.0, "effect size {d}");
}

#[test]
fn alpha_csp_top_filter_separates_classes() {
    for (erd, snr) in [(0.8, 4.0), (0.6, 2.0)] {
        let set = common::synth(200, erd, snr, 12);
        let powers = compute_powers(&set.trials, DspConfig::default(), &[BandName::Alpha]).unwrap();
        let series: Vec<LabeledSeries> = powers
            .iter()
            .map(|p| LabeledSeries { values: &p.bands[0].power, label: p.label })
            .collect();
        let csp = fit_csp_ovr(&series, BandName::Alpha, 1, 2).unwrap();
        // Raw projected variance of the top filter; a single normalized
        // log-variance feature is constant.
        let top = csp.models[0].filters.row(0).into_owned();
        let mut var = [Vec::new(), Vec::new()];
        for s in &series {
            let proj = &top * s.values;
            let m = proj.mean();
            var[s.label].push(proj.iter().map(|v| (v - m).powi(2)).sum::<f64>());
        }
        let auc = common::auc(&var[0], &var[1]);
        assert!(auc >= 0.9, "erd {erd} snr {snr}: auc {auc}");
    }
}

fn fitted_bundle() -> (Bundle, FeatureSet) {
    let set = common::synth(40, 0.8, 4.0, 1);
    let cfg = PipelineConfig::default();
    let features = common::features(&set, &cfg);
    let all: Vec<usize> = (0..features.len()).collect();
    let model = PipelineModel::fit(&features, &all, &cfg, &BandName::ALL, &ClassifierId::ALL).unwrap();
    (Bundle::new(model, set.fs, set.channels.clone(), set.classes.clone()), features)
}

#[test]
fn bundle_round_trip_predicts_identically() {
    let (bundle, features) = fitted_bundle();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    save_bundle(&bundle, &path).unwrap();
    let back = load_bundle(&path).unwrap();
    assert_eq!(back, bundle);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (row_a, row_b) in bundle.model.models.iter().zip(&back.model.models) {
        for (a, b) in row_a.iter().zip(row_b) {
            for _ in 0..100 {
                let q: Vec<f64> = (0..a.features()).map(|_| rng.random_range(-8.0..0.0)).collect();
                assert_eq!(predict_scores(a, &q).unwrap(), predict_scores(b, &q).unwrap());
            }
        }
    }
    for i in 0..features.len() {
        assert_eq!(bundle.model.score_tensor(&features, i).unwrap(), back.model.score_tensor(&features, i).unwrap());
    }
}

#[test]
fn truncated_or_mismatched_bundles_are_rejected() {
    let (bundle, _) = fitted_bundle();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    save_bundle(&bundle, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();

    let cut = dir.path().join("cut.json");
    std::fs::write(&cut, &text[..text.len() / 2]).unwrap();
    assert!(matches!(load_bundle(&cut), Err(DataError::CorruptBundle { .. })));

    assert!(matches!(
        load_bundle_for(&path, 3),
        Err(DataError::ChannelMismatch { expected: 4, found: 3 })
    ));

    let old = dir.path().join("old.json");
    std::fs::write(&old, text.replacen("\"version\":1", "\"version\":0", 1)).unwrap();
    assert!(matches!(load_bundle(&old), Err(DataError::Version { found: 0, .. })));
}
