//! Common Spatial Patterns on band-power series.
//!
//! Filters solve `Σa w = λ (Σa + Σb) w` by whitening the composite
//! covariance and diagonalizing the whitened class-`a` covariance. Features
//! are normalized log-variances of the projected components.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsp::BandName;
use crate::util::row_major;

const RIDGE: f64 = 1e-8;
const VARIANCE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CspError {
    #[error("insufficient data: no training trials for class {class}")]
    InsufficientData { class: usize },
    #[error("pairwise CSP needs exactly two classes, found {found}")]
    ClassCount { found: usize },
    #[error("series has {windows} windows, at least 2 are required")]
    TooShort { windows: usize },
    #[error("channel mismatch: model expects {expected} channels, series has {found}")]
    ChannelMismatch { expected: usize, found: usize },
    #[error("inconsistent channel counts across trials ({first} vs {other})")]
    RaggedTrials { first: usize, other: usize },
    #[error("n_components must be >= 1")]
    InvalidComponents,
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

pub type Result<T> = std::result::Result<T, CspError>;

/// Requested component count per band: 3, 4, 6, 15, 3 and 25 for delta,
/// theta, alpha, beta, SMR and all. Fitting caps these at the channel count.
pub fn default_components(band: BandName) -> usize {
    match band {
        BandName::Delta => 3,
        BandName::Theta => 4,
        BandName::Alpha => 6,
        BandName::Beta => 15,
        BandName::Smr => 3,
        BandName::All => 25,
    }
}

/// A channels × windows series with its class label.
#[derive(Debug, Clone, Copy)]
pub struct LabeledSeries<'a> {
    pub values: &'a DMatrix<f64>,
    pub label: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CspTarget {
    Pair { a: usize, b: usize },
    OneVsRest { class: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CspModel {
    pub band: BandName,
    /// One spatial filter per row (components × channels).
    #[serde(with = "row_major")]
    pub filters: DMatrix<f64>,
    /// Generalized eigenvalue of each selected filter.
    pub eigenvalues: Vec<f64>,
    pub n_components: usize,
    pub target: CspTarget,
}

impl CspModel {
    pub fn channels(&self) -> usize {
        self.filters.ncols()
    }

    /// Normalized log-variance features of `series`.
    pub fn transform(&self, series: &DMatrix<f64>) -> Result<Vec<f64>> {
        if series.nrows() != self.channels() {
            return Err(CspError::ChannelMismatch {
                expected: self.channels(),
                found: series.nrows(),
            });
        }
        if series.ncols() < 2 {
            return Err(CspError::TooShort {
                windows: series.ncols(),
            });
        }
        let projected = &self.filters * series;
        let vars: Vec<f64> = projected
            .row_iter()
            .map(|row| {
                let mean = row.mean();
                let var = row.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / row.len() as f64;
                var.max(VARIANCE_FLOOR)
            })
            .collect();
        let total: f64 = vars.iter().sum();
        Ok(vars.iter().map(|v| (v / total).ln()).collect())
    }
}

/// The CSP models of one band: a single model for two classes, one model
/// per class (one-vs-rest) otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CspSet {
    pub band: BandName,
    pub models: Vec<CspModel>,
}

impl CspSet {
    pub fn channels(&self) -> usize {
        self.models[0].channels()
    }

    pub fn feature_len(&self) -> usize {
        self.models.iter().map(|m| m.n_components).sum()
    }

    /// Per-model features concatenated in class order.
    pub fn transform(&self, series: &DMatrix<f64>) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.feature_len());
        for m in &self.models {
            out.extend(m.transform(series)?);
        }
        Ok(out)
    }
}

fn check_channels(trials: &[LabeledSeries<'_>]) -> Result<usize> {
    let first = trials.first().map_or(0, |t| t.values.nrows());
    for t in trials {
        if t.values.nrows() != first {
            return Err(CspError::RaggedTrials {
                first,
                other: t.values.nrows(),
            });
        }
    }
    Ok(first)
}

/// Centered spatial covariance of one trial, scaled to unit trace.
fn trial_covariance(x: &DMatrix<f64>) -> DMatrix<f64> {
    let windows = x.ncols();
    let mut centered = x.clone();
    for mut row in centered.row_iter_mut() {
        let mean = row.mean();
        row.add_scalar_mut(-mean);
    }
    let cov = (&centered * centered.transpose()) / windows as f64;
    let trace = cov.trace();
    if trace > 0.0 {
        cov / trace
    } else {
        cov
    }
}

/// Mean trace-normalized covariance of the trials labeled `class`, plus a
/// `1e-8·I` ridge.
pub fn class_covariance(trials: &[LabeledSeries<'_>], class: usize) -> Result<DMatrix<f64>> {
    let channels = check_channels(trials)?;
    let members: Vec<_> = trials.iter().filter(|t| t.label == class).collect();
    if members.is_empty() {
        return Err(CspError::InsufficientData { class });
    }
    if let Some(t) = members.iter().find(|t| t.values.ncols() < 2) {
        return Err(CspError::TooShort {
            windows: t.values.ncols(),
        });
    }
    let mut acc = DMatrix::zeros(channels, channels);
    for t in &members {
        acc += trial_covariance(t.values);
    }
    acc /= members.len() as f64;
    for i in 0..channels {
        acc[(i, i)] += RIDGE;
    }
    Ok(acc)
}

/// Filters and eigenvalues for all channels, eigenvalues descending.
fn generalized_filters(sigma_a: &DMatrix<f64>, sigma_b: &DMatrix<f64>) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let composite = sigma_a + sigma_b;
    let eig = SymmetricEigen::new(composite);
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if !(min > max * 1e-14) || !min.is_finite() {
        return Err(CspError::NumericalFailure(format!(
            "composite covariance is singular (eigenvalues in [{min:e}, {max:e}])"
        )));
    }
    let c = eig.eigenvalues.len();
    let whitening = DMatrix::from_fn(c, c, |i, j| eig.eigenvectors[(j, i)] / eig.eigenvalues[i].sqrt());
    let s = &whitening * sigma_a * whitening.transpose();
    let s = (&s + s.transpose()) * 0.5;
    let inner = SymmetricEigen::new(s);

    let mut order: Vec<usize> = (0..c).collect();
    order.sort_by(|&i, &j| inner.eigenvalues[j].total_cmp(&inner.eigenvalues[i]));

    let rotated = inner.eigenvectors.transpose() * &whitening;
    let mut filters = DMatrix::zeros(c, c);
    let mut eigenvalues = Vec::with_capacity(c);
    for (dst, &src) in order.iter().enumerate() {
        let mut row = rotated.row(src).into_owned();
        if let Some(first) = row.iter().find(|v| v.abs() > 1e-12) {
            if *first < 0.0 {
                row.neg_mut();
            }
        }
        filters.set_row(dst, &row);
        eigenvalues.push(inner.eigenvalues[src]);
    }
    Ok((filters, eigenvalues))
}

/// Alternates between the top and bottom of a descending spectrum:
/// 0, c−1, 1, c−2, … (the ⌈m/2⌉ largest and ⌊m/2⌋ smallest).
fn alternating_indices(c: usize, m: usize) -> Vec<usize> {
    let (mut lo, mut hi) = (0usize, c);
    (0..m)
        .map(|k| {
            if k % 2 == 0 {
                lo += 1;
                lo - 1
            } else {
                hi -= 1;
                hi
            }
        })
        .collect()
}

fn fit_pair(
    trials: &[LabeledSeries<'_>],
    band: BandName,
    n_components: usize,
    a: usize,
    b: usize,
    target: CspTarget,
) -> Result<CspModel> {
    if n_components == 0 {
        return Err(CspError::InvalidComponents);
    }
    let sigma_a = class_covariance(trials, a)?;
    let sigma_b = class_covariance(trials, b)?;
    let (all_filters, all_eigen) = generalized_filters(&sigma_a, &sigma_b)?;
    let c = all_eigen.len();
    let m = n_components.min(c);
    let picks = alternating_indices(c, m);
    let filters = DMatrix::from_fn(m, c, |r, col| all_filters[(picks[r], col)]);
    let eigenvalues = picks.iter().map(|&i| all_eigen[i]).collect();
    Ok(CspModel {
        band,
        filters,
        eigenvalues,
        n_components: m,
        target,
    })
}

fn class_labels(trials: &[LabeledSeries<'_>]) -> Vec<usize> {
    let mut labels: Vec<usize> = trials.iter().map(|t| t.label).collect();
    labels.sort_unstable();
    labels.dedup();
    labels
}

/// Two-class CSP. The lower label plays the role of class `a`.
pub fn fit_csp(trials: &[LabeledSeries<'_>], band: BandName, n_components: usize) -> Result<CspModel> {
    let labels = class_labels(trials);
    if labels.len() != 2 {
        return Err(CspError::ClassCount { found: labels.len() });
    }
    let (a, b) = (labels[0], labels[1]);
    fit_pair(trials, band, n_components, a, b, CspTarget::Pair { a, b })
}

/// One-vs-rest CSP over classes `0..n_classes`; two classes yield the
/// single pairwise model.
pub fn fit_csp_ovr(
    trials: &[LabeledSeries<'_>],
    band: BandName,
    n_components: usize,
    n_classes: usize,
) -> Result<CspSet> {
    if n_classes < 2 {
        return Err(CspError::ClassCount { found: n_classes });
    }
    for class in 0..n_classes {
        if !trials.iter().any(|t| t.label == class) {
            return Err(CspError::InsufficientData { class });
        }
    }
    if n_classes == 2 {
        return Ok(CspSet {
            band,
            models: vec![fit_csp(trials, band, n_components)?],
        });
    }
    let models = (0..n_classes)
        .map(|class| {
            // label 0 = target, 1 = rest
            let relabeled: Vec<LabeledSeries<'_>> = trials
                .iter()
                .map(|t| LabeledSeries {
                    values: t.values,
                    label: usize::from(t.label != class),
                })
                .collect();
            fit_pair(&relabeled, band, n_components, 0, 1, CspTarget::OneVsRest { class })
        })
        .collect::<Result<_>>()?;
    Ok(CspSet { band, models })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn noise(rng: &mut ChaCha8Rng, scales: &[f64], windows: usize) -> DMatrix<f64> {
        DMatrix::from_fn(scales.len(), windows, |c, _| scales[c] * rng.sample::<f64, _>(StandardNormal))
    }

    #[test]
    fn covariance_concentrates_on_loaded_channel() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = noise(&mut rng, &[1.0, 0.0, 0.0], 200);
        let cov = class_covariance(&[LabeledSeries { values: &x, label: 0 }], 0).unwrap();
        assert!((cov[(0, 0)] - 1.0).abs() < 1e-6);
        for (i, j) in [(1, 1), (2, 2), (0, 1), (1, 2)] {
            assert!(cov[(i, j)].abs() < 1e-6);
        }
    }

    #[test]
    fn duplicated_trials_do_not_change_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = noise(&mut rng, &[1.0, 2.0], 50);
        let one = class_covariance(&[LabeledSeries { values: &x, label: 3 }], 3).unwrap();
        let two = class_covariance(
            &[LabeledSeries { values: &x, label: 3 }, LabeledSeries { values: &x, label: 3 }],
            3,
        )
        .unwrap();
        assert!((one - two).abs().max() < 1e-15);
    }

    #[test]
    fn white_noise_covariance_tends_to_scaled_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let xs: Vec<DMatrix<f64>> = (0..400).map(|_| noise(&mut rng, &[1.0; 4], 100)).collect();
        let trials: Vec<_> = xs.iter().map(|x| LabeledSeries { values: x, label: 0 }).collect();
        let cov = class_covariance(&trials, 0).unwrap();
        let expected = DMatrix::<f64>::identity(4, 4) * 0.25;
        assert!((cov - expected).abs().max() < 0.01);
    }

    #[test]
    fn missing_class_is_insufficient_data() {
        let x = DMatrix::from_element(2, 5, 1.0);
        let trials = [LabeledSeries { values: &x, label: 0 }];
        assert_eq!(class_covariance(&trials, 1), Err(CspError::InsufficientData { class: 1 }));
        assert_eq!(fit_csp(&trials, BandName::Alpha, 2), Err(CspError::ClassCount { found: 1 }));
        assert_eq!(
            fit_csp_ovr(&trials, BandName::Alpha, 2, 2),
            Err(CspError::InsufficientData { class: 1 })
        );
    }

    #[test]
    fn equal_class_covariances_give_half_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let xs: Vec<DMatrix<f64>> = (0..10).map(|_| noise(&mut rng, &[1.0, 0.5, 2.0], 40)).collect();
        let mut trials: Vec<_> = xs.iter().map(|x| LabeledSeries { values: x, label: 0 }).collect();
        trials.extend(xs.iter().map(|x| LabeledSeries { values: x, label: 1 }));
        let model = fit_csp(&trials, BandName::Beta, 3).unwrap();
        assert!(model.eigenvalues.iter().all(|l| (l - 0.5).abs() < 1e-9));
    }

    #[test]
    fn components_are_capped_at_channel_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let xs: Vec<DMatrix<f64>> = (0..12).map(|_| noise(&mut rng, &[1.0; 4], 30)).collect();
        let trials: Vec<_> = xs
            .iter()
            .enumerate()
            .map(|(i, x)| LabeledSeries { values: x, label: i % 2 })
            .collect();
        let model = fit_csp(&trials, BandName::All, default_components(BandName::All)).unwrap();
        assert_eq!(model.n_components, 4);
        assert_eq!(model.filters.shape(), (4, 4));
        assert!(model.eigenvalues.windows(2).step_by(2).all(|w| w[0] >= w[1]));
        assert_eq!(fit_csp(&trials, BandName::All, 0), Err(CspError::InvalidComponents));
    }

    #[test]
    fn alternating_selection() {
        assert_eq!(alternating_indices(4, 4), vec![0, 3, 1, 2]);
        assert_eq!(alternating_indices(4, 3), vec![0, 3, 1]);
        assert_eq!(alternating_indices(6, 1), vec![0]);
    }

    #[test]
    fn ovr_builds_one_model_per_class() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let xs: Vec<DMatrix<f64>> = (0..16)
            .map(|i| {
                let mut s = [0.3; 4];
                s[i % 4] = 1.5;
                noise(&mut rng, &s, 40)
            })
            .collect();
        let trials: Vec<_> = xs
            .iter()
            .enumerate()
            .map(|(i, x)| LabeledSeries { values: x, label: i % 4 })
            .collect();
        let set = fit_csp_ovr(&trials, BandName::Alpha, 2, 4).unwrap();
        assert_eq!(set.models.len(), 4);
        for (class, m) in set.models.iter().enumerate() {
            assert_eq!(m.target, CspTarget::OneVsRest { class });
        }
        assert_eq!(set.transform(&xs[0]).unwrap().len(), 8);
        assert_eq!(
            fit_csp_ovr(&trials, BandName::Alpha, 2, 5),
            Err(CspError::InsufficientData { class: 4 })
        );
    }

    #[test]
    fn transform_floors_zero_variance_and_checks_channels() {
        let model = CspModel {
            band: BandName::Alpha,
            filters: DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]),
            eigenvalues: vec![0.9, 0.1],
            n_components: 2,
            target: CspTarget::Pair { a: 0, b: 1 },
        };
        let x = DMatrix::from_row_slice(2, 4, &[1.0, -1.0, 1.0, -1.0, 3.0, 3.0, 3.0, 3.0]);
        let f = model.transform(&x).unwrap();
        assert!(f.iter().all(|v| v.is_finite()));
        assert!((f[1] - (1e-12f64 / (1.0 + 1e-12)).ln()).abs() < 1e-9);
        assert_eq!(
            model.transform(&DMatrix::zeros(3, 4)),
            Err(CspError::ChannelMismatch { expected: 2, found: 3 })
        );
        assert_eq!(model.transform(&DMatrix::zeros(2, 1)), Err(CspError::TooShort { windows: 1 }));
    }
}
