//! Linear soft-margin SVM trained by stochastic subgradient descent on the
//! hinge loss, one machine per class, with Platt-calibrated outputs.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::util::derive_seed;

use super::Dataset;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    pub epochs: usize,
    /// Base learning rate; step `t` uses `step / sqrt(t)`.
    pub step: f64,
    /// Soft-margin penalty. The L2 weight is `1 / (c * n)`.
    pub c: f64,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            epochs: 500,
            step: 0.1,
            c: 1.0,
        }
    }
}

/// One-vs-rest hyperplane on standardized features plus its sigmoid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Machine {
    pub w: Vec<f64>,
    pub b: f64,
    pub platt_a: f64,
    pub platt_b: f64,
}

impl Machine {
    pub fn decision(&self, z: &[f64]) -> f64 {
        self.w.iter().zip(z).map(|(w, x)| w * x).sum::<f64>() + self.b
    }

    fn probability(&self, z: &[f64]) -> f64 {
        sigmoid(-(self.platt_a * self.decision(z) + self.platt_b))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    pub machines: Vec<Machine>,
}

impl SvmModel {
    pub fn features(&self) -> usize {
        self.mean.len()
    }

    pub fn n_classes(&self) -> usize {
        self.machines.len()
    }

    pub fn fit(data: &Dataset, params: &SvmParams, seed: u64) -> Self {
        let (mean, scale) = standardizer(data);
        let z: Vec<Vec<f64>> = data
            .x
            .row_iter()
            .map(|r| r.iter().zip(mean.iter().zip(&scale)).map(|(v, (m, s))| (v - m) / s).collect())
            .collect();
        let machines = (0..data.n_classes)
            .map(|class| {
                let y: Vec<f64> = data.y.iter().map(|&l| if l == class { 1.0 } else { -1.0 }).collect();
                train_machine(&z, &y, params, derive_seed(seed, &[class as u64]))
            })
            .collect();
        Self { mean, scale, machines }
    }

    /// Standardizes `x` with the training statistics.
    pub fn standardize(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(self.mean.iter().zip(&self.scale)).map(|(v, (m, s))| (v - m) / s).collect()
    }

    pub(super) fn predict(&self, x: &[f64]) -> Vec<f64> {
        let z = self.standardize(x);
        self.machines.iter().map(|m| m.probability(&z)).collect()
    }
}

fn standardizer(data: &Dataset) -> (Vec<f64>, Vec<f64>) {
    let n = data.len() as f64;
    let mut mean = Vec::with_capacity(data.features());
    let mut scale = Vec::with_capacity(data.features());
    for col in data.x.column_iter() {
        let m = col.sum() / n;
        let var = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
        mean.push(m);
        scale.push(if var.sqrt() > 1e-12 { var.sqrt() } else { 1.0 });
    }
    (mean, scale)
}

fn train_machine(z: &[Vec<f64>], y: &[f64], params: &SvmParams, seed: u64) -> Machine {
    let n = z.len();
    let d = z[0].len();
    let lambda = 1.0 / (params.c * n as f64);
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = 0u64;
    for _ in 0..params.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = params.step / (t as f64).sqrt();
            let margin = y[i] * (w.iter().zip(&z[i]).map(|(a, b)| a * b).sum::<f64>() + b);
            let decay = 1.0 - eta * lambda;
            w.iter_mut().for_each(|v| *v *= decay);
            if margin < 1.0 {
                for (wj, xj) in w.iter_mut().zip(&z[i]) {
                    *wj += eta * y[i] * xj;
                }
                b += eta * y[i];
            }
        }
    }
    let mut machine = Machine {
        w,
        b,
        platt_a: 0.0,
        platt_b: 0.0,
    };
    let decisions: Vec<f64> = z.iter().map(|zi| machine.decision(zi)).collect();
    let (a, bb) = platt(&decisions, y);
    machine.platt_a = a;
    machine.platt_b = bb;
    machine
}

fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

/// Fits `P(y=1|f) = 1 / (1 + exp(A f + B))` by Newton's method with
/// backtracking on smoothed targets (Lin, Lin and Weng's formulation).
pub(crate) fn platt(f: &[f64], y: &[f64]) -> (f64, f64) {
    let prior1 = y.iter().filter(|&&v| v > 0.0).count() as f64;
    let prior0 = y.len() as f64 - prior1;
    let hi = (prior1 + 1.0) / (prior1 + 2.0);
    let lo = 1.0 / (prior0 + 2.0);
    let t: Vec<f64> = y.iter().map(|&v| if v > 0.0 { hi } else { lo }).collect();

    let objective = |a: f64, b: f64| -> f64 {
        f.iter()
            .zip(&t)
            .map(|(&fi, &ti)| {
                let s = fi * a + b;
                if s >= 0.0 {
                    ti * s + (1.0 + (-s).exp()).ln()
                } else {
                    (ti - 1.0) * s + (1.0 + s.exp()).ln()
                }
            })
            .sum()
    };

    let sigma = 1e-12;
    let mut a = 0.0;
    let mut b = ((prior0 + 1.0) / (prior1 + 1.0)).ln();
    let mut fval = objective(a, b);
    for _ in 0..100 {
        let (mut h11, mut h22, mut h21, mut g1, mut g2) = (sigma, sigma, 0.0, 0.0, 0.0);
        for (&fi, &ti) in f.iter().zip(&t) {
            let s = fi * a + b;
            let (p, q) = if s >= 0.0 {
                let e = (-s).exp();
                (e / (1.0 + e), 1.0 / (1.0 + e))
            } else {
                let e = s.exp();
                (1.0 / (1.0 + e), e / (1.0 + e))
            };
            let d2 = p * q;
            h11 += fi * fi * d2;
            h22 += d2;
            h21 += fi * d2;
            let d1 = ti - p;
            g1 += fi * d1;
            g2 += d1;
        }
        if g1.abs() < 1e-5 && g2.abs() < 1e-5 {
            break;
        }
        let det = h11 * h22 - h21 * h21;
        let da = -(h22 * g1 - h21 * g2) / det;
        let db = -(-h21 * g1 + h11 * g2) / det;
        let gd = g1 * da + g2 * db;
        let mut step = 1.0;
        let mut improved = false;
        while step >= 1e-10 {
            let (na, nb) = (a + step * da, b + step * db);
            let nf = objective(na, nb);
            if nf < fval + 1e-4 * step * gd {
                a = na;
                b = nb;
                fval = nf;
                improved = true;
                break;
            }
            step /= 2.0;
        }
        if !improved {
            break;
        }
    }
    (a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn separable_line_gets_a_positive_margin() {
        let x = DMatrix::from_row_slice(6, 1, &[-3.0, -2.0, -1.0, 1.0, 2.0, 3.0]);
        let data = Dataset::new(x, vec![0, 0, 0, 1, 1, 1], 2).unwrap();
        let m = SvmModel::fit(&data, &SvmParams::default(), 1);
        let z = m.standardize(&[2.0]);
        assert!(m.machines[1].decision(&z) > 0.0);
        assert!(m.machines[0].decision(&z) < 0.0);
        let p = m.predict(&[2.0]);
        assert!(p[1] > p[0]);
    }

    #[test]
    fn platt_slope_is_negative_for_informative_scores() {
        let f = [-2.0, -1.5, -1.0, -0.2, 0.3, 1.0, 1.4, 2.2];
        let y = [-1.0, -1.0, -1.0, 1.0, -1.0, 1.0, 1.0, 1.0];
        let (a, _) = platt(&f, &y);
        assert!(a < 0.0);
    }

    #[test]
    fn seed_controls_the_fit() {
        let x = DMatrix::from_row_slice(6, 2, &[0.0, 1.0, 0.5, 0.2, 0.1, 0.9, 1.0, 0.0, 0.8, 0.3, 1.2, 0.1]);
        let data = Dataset::new(x, vec![0, 0, 0, 1, 1, 1], 2).unwrap();
        let p = SvmParams {
            epochs: 3,
            ..SvmParams::default()
        };
        assert_eq!(SvmModel::fit(&data, &p, 4), SvmModel::fit(&data, &p, 4));
    }
}
