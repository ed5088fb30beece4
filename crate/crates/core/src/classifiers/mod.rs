//! Base classifiers of the ensemble.
//!
//! Five families share one contract: [`fit`] on a [`Dataset`] yields an
//! immutable [`Model`], and [`predict_scores`] maps a feature vector to a
//! [`ScoreVector`] of per-class probabilities summing to one.

mod gaussian;
mod gp;
mod knn;
mod svm;

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use gaussian::GaussianModel;
pub use gp::{GpModel, GpParams};
pub use knn::KnnModel;
pub use svm::{SvmModel, SvmParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifierError {
    #[error("insufficient data: class {class} has {count} training samples, at least 2 are required")]
    InsufficientData { class: usize, count: usize },
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("dimension mismatch: model expects {expected} features, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("numerical failure in {classifier}: {message}")]
    NumericalFailure { classifier: ClassifierId, message: String },
    #[error("unknown classifier `{0}`")]
    UnknownClassifier(String),
}

pub type Result<T> = std::result::Result<T, ClassifierError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierId {
    Lda,
    Qda,
    Knn,
    Svm,
    Gp,
}

impl ClassifierId {
    pub const ALL: [ClassifierId; 5] = [
        ClassifierId::Lda,
        ClassifierId::Qda,
        ClassifierId::Knn,
        ClassifierId::Svm,
        ClassifierId::Gp,
    ];

    pub fn token(self) -> &'static str {
        match self {
            ClassifierId::Lda => "lda",
            ClassifierId::Qda => "qda",
            ClassifierId::Knn => "knn",
            ClassifierId::Svm => "svm",
            ClassifierId::Gp => "gp",
        }
    }

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|&c| c == self).unwrap()
    }
}

impl fmt::Display for ClassifierId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for ClassifierId {
    type Err = ClassifierError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.token() == s)
            .ok_or_else(|| ClassifierError::UnknownClassifier(s.to_string()))
    }
}

/// Training data: one row of `x` per trial.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: DMatrix<f64>,
    pub y: Vec<usize>,
    pub n_classes: usize,
}

impl Dataset {
    pub fn new(x: DMatrix<f64>, y: Vec<usize>, n_classes: usize) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(ClassifierError::InvalidDataset(format!(
                "{} feature rows but {} labels",
                x.nrows(),
                y.len()
            )));
        }
        if n_classes < 2 {
            return Err(ClassifierError::InvalidDataset(format!(
                "need at least 2 classes, got {n_classes}"
            )));
        }
        if x.ncols() == 0 {
            return Err(ClassifierError::InvalidDataset("no features".into()));
        }
        if let Some(&bad) = y.iter().find(|&&l| l >= n_classes) {
            return Err(ClassifierError::InvalidDataset(format!(
                "label {bad} outside 0..{n_classes}"
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(ClassifierError::InvalidDataset("non-finite feature value".into()));
        }
        Ok(Self { x, y, n_classes })
    }

    /// Builds a dataset from feature rows.
    pub fn from_rows(rows: &[Vec<f64>], y: Vec<usize>, n_classes: usize) -> Result<Self> {
        let d = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != d) {
            return Err(ClassifierError::InvalidDataset("ragged feature rows".into()));
        }
        let x = DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]);
        Self::new(x, y, n_classes)
    }

    pub fn features(&self) -> usize {
        self.x.ncols()
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &l in &self.y {
            counts[l] += 1;
        }
        counts
    }

    fn require_two_per_class(&self) -> Result<()> {
        match self.class_counts().into_iter().enumerate().find(|&(_, c)| c < 2) {
            Some((class, count)) => Err(ClassifierError::InsufficientData { class, count }),
            None => Ok(()),
        }
    }
}

/// Per-class scores in `[0, 1]` summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreVector(Vec<f64>);

impl ScoreVector {
    pub fn uniform(n_classes: usize) -> Self {
        Self(vec![1.0 / n_classes as f64; n_classes])
    }

    /// Divides by the sum. A vector with no positive mass (or any
    /// non-finite entry) becomes uniform; the flag reports that fallback.
    pub fn normalize(raw: Vec<f64>) -> (Self, bool) {
        let mut raw = raw;
        let fell_back = normalize_in_place(&mut raw);
        (Self(raw), fell_back)
    }

    /// Wraps already-normalized scores.
    pub fn from_normalized(scores: Vec<f64>) -> Self {
        debug_assert!((scores.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        Self(scores)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Index of the largest score; ties go to the lowest index.
    pub fn argmax(&self) -> usize {
        argmax(&self.0)
    }
}

/// Lowest index of the maximum.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Normalizes to unit sum, returning true when the uniform fallback fired.
pub(crate) fn normalize_in_place(v: &mut [f64]) -> bool {
    let sum: f64 = v.iter().map(|x| x.max(0.0)).sum();
    if sum > 0.0 && sum.is_finite() && v.iter().all(|x| x.is_finite()) {
        for x in v.iter_mut() {
            *x = x.max(0.0) / sum;
        }
        false
    } else {
        let u = 1.0 / v.len() as f64;
        v.iter_mut().for_each(|x| *x = u);
        true
    }
}

/// Softmax of log-scores (max-shifted).
pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.iter().map(|e| e / sum).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Priors {
    #[default]
    Uniform,
    Empirical,
}

/// Hyperparameters of all five families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierParams {
    /// Shrinkage of LDA/QDA covariances, as a fraction of `tr(Σ)/d`.
    pub ridge: f64,
    pub priors: Priors,
    pub knn_k: usize,
    pub svm: SvmParams,
    pub gp: GpParams,
}

impl Default for ClassifierParams {
    fn default() -> Self {
        Self {
            ridge: 1e-3,
            priors: Priors::Uniform,
            knn_k: 5,
            svm: SvmParams::default(),
            gp: GpParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Model {
    Lda(GaussianModel),
    Qda(GaussianModel),
    Knn(KnnModel),
    Svm(SvmModel),
    Gp(GpModel),
}

impl Model {
    pub fn id(&self) -> ClassifierId {
        match self {
            Model::Lda(_) => ClassifierId::Lda,
            Model::Qda(_) => ClassifierId::Qda,
            Model::Knn(_) => ClassifierId::Knn,
            Model::Svm(_) => ClassifierId::Svm,
            Model::Gp(_) => ClassifierId::Gp,
        }
    }

    pub fn features(&self) -> usize {
        match self {
            Model::Lda(m) | Model::Qda(m) => m.features(),
            Model::Knn(m) => m.features(),
            Model::Svm(m) => m.features(),
            Model::Gp(m) => m.features(),
        }
    }

    pub fn n_classes(&self) -> usize {
        match self {
            Model::Lda(m) | Model::Qda(m) => m.n_classes(),
            Model::Knn(m) => m.n_classes,
            Model::Svm(m) => m.n_classes(),
            Model::Gp(m) => m.n_classes,
        }
    }
}

/// Fits classifier `id`. `seed` drives the only stochastic step (the SVM's
/// sample order).
pub fn fit(id: ClassifierId, data: &Dataset, params: &ClassifierParams, seed: u64) -> Result<Model> {
    data.require_two_per_class()?;
    Ok(match id {
        ClassifierId::Lda => Model::Lda(GaussianModel::fit_lda(data, params)?),
        ClassifierId::Qda => Model::Qda(GaussianModel::fit_qda(data, params)?),
        ClassifierId::Knn => Model::Knn(KnnModel::fit(data, params.knn_k)),
        ClassifierId::Svm => Model::Svm(SvmModel::fit(data, &params.svm, seed)),
        ClassifierId::Gp => Model::Gp(GpModel::fit(data, &params.gp)?),
    })
}

pub fn predict_scores(model: &Model, x: &[f64]) -> Result<ScoreVector> {
    if x.len() != model.features() {
        return Err(ClassifierError::DimensionMismatch {
            expected: model.features(),
            found: x.len(),
        });
    }
    let raw = match model {
        Model::Lda(m) | Model::Qda(m) => m.predict(x),
        Model::Knn(m) => m.predict(x),
        Model::Svm(m) => m.predict(x),
        Model::Gp(m) => m.predict(x),
    };
    Ok(ScoreVector::normalize(raw).0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_and_fallback() {
        let (s, fb) = ScoreVector::normalize(vec![0.6, 0.2]);
        assert!(!fb);
        assert!((s.as_slice()[0] - 0.75).abs() < 1e-15);
        let (u, fb) = ScoreVector::normalize(vec![0.0, 0.0, 0.0, 0.0]);
        assert!(fb);
        assert_eq!(u.as_slice(), &[0.25; 4]);
        let (u, fb) = ScoreVector::normalize(vec![f64::NAN, 1.0]);
        assert!(fb);
        assert_eq!(u.as_slice(), &[0.5, 0.5]);
    }

    #[test]
    fn argmax_breaks_ties_low() {
        assert_eq!(argmax(&[0.5, 0.5]), 0);
        assert_eq!(argmax(&[0.1, 0.2, 0.4, 0.3]), 2);
    }

    #[test]
    fn dataset_validation() {
        let x = DMatrix::zeros(3, 2);
        assert!(Dataset::new(x.clone(), vec![0, 1], 2).is_err());
        assert!(Dataset::new(x.clone(), vec![0, 1, 2], 2).is_err());
        assert!(Dataset::new(x.clone(), vec![0, 1, 1], 1).is_err());
        assert!(Dataset::new(DMatrix::zeros(3, 0), vec![0, 1, 1], 2).is_err());
        let d = Dataset::new(x, vec![0, 1, 1], 2).unwrap();
        assert_eq!(d.class_counts(), vec![1, 2]);
        assert_eq!(
            fit(ClassifierId::Lda, &d, &ClassifierParams::default(), 0),
            Err(ClassifierError::InsufficientData { class: 0, count: 1 })
        );
        assert!(Dataset::from_rows(&[vec![1.0], vec![1.0, 2.0]], vec![0, 1], 2).is_err());
    }

    #[test]
    fn ids_parse() {
        for id in ClassifierId::ALL {
            assert_eq!(id.token().parse::<ClassifierId>().unwrap(), id);
            assert_eq!(serde_json::to_string(&id).unwrap(), format!("\"{id}\""));
        }
        assert!("rf".parse::<ClassifierId>().is_err());
    }
}
