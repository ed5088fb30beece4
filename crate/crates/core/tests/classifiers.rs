use emf_core::classifiers::{fit, predict_scores, ClassifierId, ClassifierParams, Dataset, Model};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Two unit-variance blobs whose means are `gap` apart on the first axis.
fn blobs(n: usize, gap: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut z = || -> f64 { StandardNormal.sample(&mut rng) };
    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let label = i % 2;
        let shift = if label == 0 { -gap / 2.0 } else { gap / 2.0 };
        rows.push(vec![shift + z(), z()]);
        y.push(label);
    }
    (rows, y)
}

fn accuracy(model: &Model, rows: &[Vec<f64>], y: &[usize]) -> f64 {
    let hits = rows
        .iter()
        .zip(y)
        .filter(|(r, &l)| predict_scores(model, r).unwrap().argmax() == l)
        .count();
    hits as f64 / rows.len() as f64
}

#[test]
fn every_classifier_separates_six_sigma_blobs() {
    let (train, ty) = blobs(100, 6.0, 1);
    let (test, sy) = blobs(100, 6.0, 2);
    let data = Dataset::from_rows(&train, ty, 2).unwrap();
    for id in ClassifierId::ALL {
        let model = fit(id, &data, &ClassifierParams::default(), 3).unwrap();
        let acc = accuracy(&model, &test, &sy);
        assert!(acc >= 0.95, "{id}: {acc}");
    }
}

#[test]
fn scores_sum_to_one_on_random_queries() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n_classes in [2, 4] {
        let rows: Vec<Vec<f64>> = (0..60).map(|_| (0..3).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let y: Vec<usize> = (0..60).map(|i| i % n_classes).collect();
        let data = Dataset::from_rows(&rows, y, n_classes).unwrap();
        for id in ClassifierId::ALL {
            let model = fit(id, &data, &ClassifierParams::default(), 1).unwrap();
            for _ in 0..10_000 {
                let q: Vec<f64> = (0..3).map(|_| rng.random_range(-20.0..20.0)).collect();
                let s = predict_scores(&model, &q).unwrap();
                let sum: f64 = s.as_slice().iter().sum();
                assert!((sum - 1.0).abs() <= 1e-9, "{id} K={n_classes}: {sum}");
                assert!(s.as_slice().iter().all(|v| (0.0..=1.0).contains(v)));
            }
        }
    }
}

#[test]
fn lda_log_odds_are_affine() {
    let (rows, y) = blobs(80, 2.0, 7);
    let data = Dataset::from_rows(&rows, y, 2).unwrap();
    let model = fit(ClassifierId::Lda, &data, &ClassifierParams::default(), 0).unwrap();
    let logit = |q: &[f64]| {
        let s = predict_scores(&model, q).unwrap();
        (s.as_slice()[1] / s.as_slice()[0]).ln()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..200 {
        let a = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        let b = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        let mid = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
        assert!((logit(&mid) - (logit(&a) + logit(&b)) / 2.0).abs() < 1e-9);
    }
}

#[test]
fn relabeling_permutes_scores() {
    let (rows, y) = blobs(60, 1.5, 11);
    let flipped: Vec<usize> = y.iter().map(|l| 1 - l).collect();
    let a = Dataset::from_rows(&rows, y, 2).unwrap();
    let b = Dataset::from_rows(&rows, flipped, 2).unwrap();
    let params = ClassifierParams::default();
    for id in [ClassifierId::Lda, ClassifierId::Qda, ClassifierId::Knn, ClassifierId::Gp] {
        let ma = fit(id, &a, &params, 0).unwrap();
        let mb = fit(id, &b, &params, 0).unwrap();
        for q in rows.iter().take(30) {
            let sa = predict_scores(&ma, q).unwrap();
            let sb = predict_scores(&mb, q).unwrap();
            assert!((sa.as_slice()[0] - sb.as_slice()[1]).abs() < 1e-9, "{id}");
        }
    }
}

#[test]
fn fits_are_deterministic_per_seed() {
    let (rows, y) = blobs(60, 1.0, 13);
    let data = Dataset::from_rows(&rows, y, 2).unwrap();
    for id in ClassifierId::ALL {
        let a = fit(id, &data, &ClassifierParams::default(), 42).unwrap();
        let b = fit(id, &data, &ClassifierParams::default(), 42).unwrap();
        assert_eq!(a, b, "{id}");
    }
}
