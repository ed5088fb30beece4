//! Gaussian-process classifier: RBF kernel, logistic likelihood, Laplace
//! approximation found by Newton iteration. Binary problems use one latent
//! function; more classes use one per class against the rest.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::util::row_major;

use super::{ClassifierError, ClassifierId, Dataset, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GpParams {
    /// RBF length scale; `None` uses the median pairwise training distance.
    pub length_scale: Option<f64>,
    pub signal_variance: f64,
    pub jitter: f64,
    pub max_newton: usize,
    pub tol: f64,
}

impl Default for GpParams {
    fn default() -> Self {
        Self {
            length_scale: None,
            signal_variance: 1.0,
            jitter: 1e-6,
            max_newton: 50,
            tol: 1e-8,
        }
    }
}

/// Quantities needed for the predictive mean and variance at the mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentPosterior {
    /// `t - π(f̂)`: the likelihood gradient at the mode.
    pub grad: Vec<f64>,
    pub sqrt_w: Vec<f64>,
    /// Lower Cholesky factor of `I + W^½ K W^½`.
    #[serde(with = "row_major")]
    pub chol: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpModel {
    #[serde(with = "row_major")]
    pub x: DMatrix<f64>,
    pub length_scale: f64,
    pub signal_variance: f64,
    pub n_classes: usize,
    pub latents: Vec<LatentPosterior>,
}

impl GpModel {
    pub fn features(&self) -> usize {
        self.x.ncols()
    }

    pub fn fit(data: &Dataset, params: &GpParams) -> Result<Self> {
        let length_scale = params.length_scale.unwrap_or_else(|| median_distance(&data.x));
        let mut k = rbf_gram(&data.x, length_scale, params.signal_variance);
        for i in 0..k.nrows() {
            k[(i, i)] += params.jitter;
        }
        let targets: Vec<usize> = if data.n_classes == 2 { vec![1] } else { (0..data.n_classes).collect() };
        let latents = targets
            .into_iter()
            .map(|class| {
                let t: Vec<f64> = data.y.iter().map(|&l| f64::from(u8::from(l == class))).collect();
                laplace_mode(&k, &t, params)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            x: data.x.clone(),
            length_scale,
            signal_variance: params.signal_variance,
            n_classes: data.n_classes,
            latents,
        })
    }

    pub(super) fn predict(&self, q: &[f64]) -> Vec<f64> {
        let ks = DVector::from_iterator(
            self.x.nrows(),
            self.x.row_iter().map(|r| rbf(r.iter().copied(), q, self.length_scale, self.signal_variance)),
        );
        let probs: Vec<f64> = self.latents.iter().map(|l| self.predictive(l, &ks)).collect();
        if self.n_classes == 2 {
            vec![1.0 - probs[0], probs[0]]
        } else {
            probs
        }
    }

    fn predictive(&self, l: &LatentPosterior, ks: &DVector<f64>) -> f64 {
        let mean: f64 = ks.iter().zip(&l.grad).map(|(a, b)| a * b).sum();
        let mut v = DVector::from_iterator(ks.len(), ks.iter().zip(&l.sqrt_w).map(|(a, b)| a * b));
        l.chol.solve_lower_triangular_mut(&mut v);
        let var = (self.signal_variance - v.norm_squared()).max(0.0);
        // Probit approximation to the logistic-Gaussian integral.
        let kappa = 1.0 / (1.0 + std::f64::consts::PI * var / 8.0).sqrt();
        sigmoid(kappa * mean)
    }
}

fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

fn rbf(a: impl Iterator<Item = f64>, b: &[f64], ell: f64, sf2: f64) -> f64 {
    let d2: f64 = a.zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    sf2 * (-d2 / (2.0 * ell * ell)).exp()
}

fn rbf_gram(x: &DMatrix<f64>, ell: f64, sf2: f64) -> DMatrix<f64> {
    let n = x.nrows();
    let rows: Vec<Vec<f64>> = x.row_iter().map(|r| r.iter().copied().collect()).collect();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        k[(i, i)] = sf2;
        for j in 0..i {
            let v = rbf(rows[i].iter().copied(), &rows[j], ell, sf2);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

/// Median Euclidean distance over distinct training pairs, or 1 when all
/// points coincide.
fn median_distance(x: &DMatrix<f64>) -> f64 {
    let n = x.nrows();
    let mut d = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in 0..i {
            d.push((x.row(i) - x.row(j)).norm());
        }
    }
    if d.is_empty() {
        return 1.0;
    }
    d.sort_by(f64::total_cmp);
    let m = d.len();
    let med = if m % 2 == 1 { d[m / 2] } else { 0.5 * (d[m / 2 - 1] + d[m / 2]) };
    if med > 0.0 {
        med
    } else {
        1.0
    }
}

/// Newton iteration for the posterior mode with targets `t ∈ {0, 1}`.
fn laplace_mode(k: &DMatrix<f64>, t: &[f64], params: &GpParams) -> Result<LatentPosterior> {
    let n = t.len();
    let t = DVector::from_column_slice(t);
    let mut f = DVector::<f64>::zeros(n);
    let mut prev = f64::NEG_INFINITY;
    let failure = |message: &str| ClassifierError::NumericalFailure {
        classifier: ClassifierId::Gp,
        message: message.to_string(),
    };
    let mut state = None;
    for _ in 0..params.max_newton {
        let pi = f.map(sigmoid);
        let w = pi.map(|p| p * (1.0 - p));
        let sw = w.map(f64::sqrt);
        let b_mat = DMatrix::identity(n, n) + DMatrix::from_diagonal(&sw) * k * DMatrix::from_diagonal(&sw);
        let chol = b_mat.cholesky().ok_or_else(|| failure("Newton system is not positive definite"))?;
        let grad = &t - &pi;
        let b = w.component_mul(&f) + &grad;
        let kb = k * &b;
        let rhs = sw.component_mul(&kb);
        let solved = chol.solve(&rhs);
        let a = &b - sw.component_mul(&solved);
        let f_new = k * &a;
        let log_lik: f64 = f_new
            .iter()
            .zip(t.iter())
            .map(|(&fi, &ti)| {
                let s = if ti > 0.5 { fi } else { -fi };
                -softplus(-s)
            })
            .sum();
        let obj = -0.5 * a.dot(&f_new) + log_lik;
        if !obj.is_finite() {
            return Err(failure("objective diverged"));
        }
        let delta = (&f_new - &f).amax();
        f = f_new;
        state = Some(());
        if (obj - prev).abs() < params.tol || delta < params.tol {
            break;
        }
        prev = obj;
    }
    state.ok_or_else(|| failure("no Newton iterations"))?;
    let pi = f.map(sigmoid);
    let w = pi.map(|p| p * (1.0 - p));
    let sw = w.map(f64::sqrt);
    let b_mat = DMatrix::identity(n, n) + DMatrix::from_diagonal(&sw) * k * DMatrix::from_diagonal(&sw);
    let chol = b_mat.cholesky().ok_or_else(|| failure("posterior system is not positive definite"))?;
    Ok(LatentPosterior {
        grad: (&t - &pi).iter().copied().collect(),
        sqrt_w: sw.iter().copied().collect(),
        chol: chol.l(),
    })
}

fn softplus(v: f64) -> f64 {
    if v > 0.0 {
        v + (-v).exp().ln_1p()
    } else {
        v.exp().ln_1p()
    }
}
