//! Gaussian discriminants: LDA (shared covariance) and QDA (per class).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::util::row_major;

use super::{softmax, ClassifierError, ClassifierId, ClassifierParams, Dataset, Priors, Result};

/// Class means plus one precision matrix (LDA) or one per class (QDA).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianModel {
    pub means: Vec<Vec<f64>>,
    #[serde(with = "row_major::vec")]
    pub precisions: Vec<DMatrix<f64>>,
    /// `-0.5 ln det Σ_k + ln π_k`, per class.
    pub offsets: Vec<f64>,
}

impl GaussianModel {
    pub fn features(&self) -> usize {
        self.means[0].len()
    }

    pub fn n_classes(&self) -> usize {
        self.means.len()
    }

    pub fn fit_lda(data: &Dataset, params: &ClassifierParams) -> Result<Self> {
        let means = class_means(data);
        let d = data.features();
        let mut pooled = DMatrix::<f64>::zeros(d, d);
        for (i, row) in data.x.row_iter().enumerate() {
            let diff = row.transpose() - &means[data.y[i]];
            pooled.ger(1.0, &diff, &diff, 1.0);
        }
        pooled /= (data.len() - data.n_classes).max(1) as f64;
        let (precision, log_det) = regularized_inverse(pooled, params.ridge, ClassifierId::Lda)?;
        let offsets = log_priors(data, params.priors)
            .into_iter()
            .map(|lp| lp - 0.5 * log_det)
            .collect();
        Ok(Self {
            means: means.into_iter().map(|m| m.as_slice().to_vec()).collect(),
            precisions: vec![precision],
            offsets,
        })
    }

    pub fn fit_qda(data: &Dataset, params: &ClassifierParams) -> Result<Self> {
        let means = class_means(data);
        let d = data.features();
        let counts = data.class_counts();
        let mut covs = vec![DMatrix::<f64>::zeros(d, d); data.n_classes];
        for (i, row) in data.x.row_iter().enumerate() {
            let k = data.y[i];
            let diff = row.transpose() - &means[k];
            covs[k].ger(1.0, &diff, &diff, 1.0);
        }
        let priors = log_priors(data, params.priors);
        let mut precisions = Vec::with_capacity(data.n_classes);
        let mut offsets = Vec::with_capacity(data.n_classes);
        for (k, cov) in covs.into_iter().enumerate() {
            let cov = cov / (counts[k] - 1) as f64;
            let (p, log_det) = regularized_inverse(cov, params.ridge, ClassifierId::Qda)?;
            precisions.push(p);
            offsets.push(priors[k] - 0.5 * log_det);
        }
        Ok(Self {
            means: means.into_iter().map(|m| m.as_slice().to_vec()).collect(),
            precisions,
            offsets,
        })
    }

    pub(super) fn predict(&self, x: &[f64]) -> Vec<f64> {
        let x = DVector::from_column_slice(x);
        let logits: Vec<f64> = self
            .means
            .iter()
            .enumerate()
            .map(|(k, mu)| {
                let diff = &x - DVector::from_column_slice(mu);
                let p = &self.precisions[k.min(self.precisions.len() - 1)];
                -0.5 * diff.dot(&(p * &diff)) + self.offsets[k]
            })
            .collect();
        softmax(&logits)
    }
}

fn class_means(data: &Dataset) -> Vec<DVector<f64>> {
    let d = data.features();
    let counts = data.class_counts();
    let mut means = vec![DVector::<f64>::zeros(d); data.n_classes];
    for (i, row) in data.x.row_iter().enumerate() {
        means[data.y[i]] += row.transpose();
    }
    for (m, &c) in means.iter_mut().zip(&counts) {
        *m /= c as f64;
    }
    means
}

fn log_priors(data: &Dataset, priors: Priors) -> Vec<f64> {
    match priors {
        Priors::Uniform => vec![-(data.n_classes as f64).ln(); data.n_classes],
        Priors::Empirical => {
            let n = data.len() as f64;
            data.class_counts().into_iter().map(|c| (c as f64 / n).ln()).collect()
        }
    }
}

/// Adds `ridge * tr(Σ)/d` to the diagonal and inverts via Cholesky,
/// returning the precision and `ln det` of the shrunk matrix.
fn regularized_inverse(cov: DMatrix<f64>, ridge: f64, id: ClassifierId) -> Result<(DMatrix<f64>, f64)> {
    let d = cov.nrows();
    let shift = (ridge * cov.trace() / d as f64).max(1e-10);
    let shrunk = cov + DMatrix::identity(d, d) * shift;
    let chol = shrunk.cholesky().ok_or_else(|| ClassifierError::NumericalFailure {
        classifier: id,
        message: "covariance is not positive definite".into(),
    })?;
    let log_det = 2.0 * chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    Ok((chol.inverse(), log_det))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn two_points() -> Dataset {
        Dataset::from_rows(
            &[vec![-1.0, 0.0], vec![-1.0, 0.2], vec![1.0, 0.0], vec![1.0, 0.2]],
            vec![0, 0, 1, 1],
            2,
        )
        .unwrap()
    }

    #[test]
    fn lda_is_even_at_the_midpoint() {
        let m = GaussianModel::fit_lda(&two_points(), &ClassifierParams::default()).unwrap();
        let s = m.predict(&[0.0, 0.1]);
        assert_abs_diff_eq!(s[0], 0.5, epsilon = 1e-9);
        assert!(m.predict(&[-0.5, 0.1])[0] > 0.9);
    }

    #[test]
    fn lda_means_and_pooled_covariance() {
        let m = GaussianModel::fit_lda(&two_points(), &ClassifierParams::default()).unwrap();
        assert_eq!(m.means[0], vec![-1.0, 0.1]);
        assert_eq!(m.precisions.len(), 1);
        // Scatter 4 * 0.01 over N - K = 2 gives diag(0, 0.02); the shift is
        // 1e-3 * 0.01, so the second precision entry is 1/0.02001.
        assert_abs_diff_eq!(m.precisions[0][(1, 1)], 1.0 / 0.02001, epsilon = 1e-9);
    }

    #[test]
    fn qda_prefers_the_tighter_class_near_its_mean() {
        let rows = [
            vec![0.0, 0.01],
            vec![0.0, -0.01],
            vec![0.01, 0.0],
            vec![0.0, 2.0],
            vec![0.0, -2.0],
            vec![2.0, 0.0],
        ];
        let data = Dataset::from_rows(&rows, vec![0, 0, 0, 1, 1, 1], 2).unwrap();
        let m = GaussianModel::fit_qda(&data, &ClassifierParams::default()).unwrap();
        assert_eq!(m.precisions.len(), 2);
        assert!(m.predict(&[0.0, 0.0])[0] > 0.99);
        assert!(m.predict(&[3.0, 3.0])[1] > 0.99);
    }
}
