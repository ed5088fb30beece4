//! The five base classifiers on two Gaussian blobs, with their score vectors
//! for a point between the blobs.
use emf_core::classifiers::{fit, predict_scores, ClassifierId, ClassifierParams, Dataset};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for i in 0..80 {
        let class = i % 2;
        let center = if class == 0 { -1.5 } else { 1.5 };
        let a: f64 = StandardNormal.sample(&mut rng);
        let b: f64 = StandardNormal.sample(&mut rng);
        rows.push(vec![center + a, 0.5 * b]);
        y.push(class);
    }
    let data = Dataset::from_rows(&rows, y, 2).unwrap();
    let params = ClassifierParams::default();
    for id in ClassifierId::ALL {
        let model = fit(id, &data, &params, 7).unwrap();
        let correct = rows
            .iter()
            .zip(&data.y)
            .filter(|(r, &l)| predict_scores(&model, r).unwrap().argmax() == l)
            .count();
        let mid = predict_scores(&model, &[0.3, 0.0]).unwrap();
        println!("{:>4}  train acc {:.3}  scores at (0.3, 0) {:.3?}", id.token(), correct as f64 / 80.0, mid.as_slice());
    }
}
