//! Trial → band power → (difference) → CSP → base classifiers → fusion.
//!
//! Band power and differencing are per-trial and label-free, so they are
//! computed once for a whole dataset ([`FeatureSet`]). CSP filters and
//! classifiers are fitted on training indices only ([`PipelineModel::fit`]).

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifiers::{self, ClassifierError, ClassifierId, ClassifierParams, Dataset, Model};
use crate::csp::{self, default_components, CspError, CspSet, LabeledSeries};
use crate::dsp::{differentiate, BandName, BandPowerExtractor, BandPowerSeries, DspConfig, DspError, Trial};
use crate::fusion::{fuse, FusionConfig, FusionError, Fused, ScoreTensor};
use crate::util::derive_seed;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Dsp(#[from] DspError),
    #[error(transparent)]
    Csp(#[from] CspError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Fusion(#[from] FusionError),
    #[error("band `{0}` was not extracted")]
    MissingBand(BandName),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, PipelineError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub dsp: DspConfig,
    /// Difference band-power series along time before CSP.
    pub differentiate: bool,
    /// Requested CSP components per band; missing bands use the defaults.
    pub components: BTreeMap<BandName, usize>,
    pub classifiers: ClassifierParams,
    pub fusion: FusionConfig,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            dsp: DspConfig::default(),
            differentiate: true,
            components: BandName::ALL.iter().map(|&b| (b, default_components(b))).collect(),
            classifiers: ClassifierParams::default(),
            fusion: FusionConfig::default(),
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn components_for(&self, band: BandName) -> usize {
        self.components.get(&band).copied().unwrap_or_else(|| default_components(band))
    }
}

/// Band power of one trial for each extracted band.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialPowers {
    pub label: usize,
    pub bands: Vec<BandPowerSeries>,
}

/// Computes band powers for every trial (in parallel).
pub fn compute_powers(trials: &[Trial], dsp: DspConfig, bands: &[BandName]) -> Result<Vec<TrialPowers>> {
    let extractor = BandPowerExtractor::new(dsp)?;
    let wave: Vec<_> = bands.iter().map(|b| b.band()).collect();
    trials
        .par_iter()
        .map(|t| {
            Ok(TrialPowers {
                label: t.label,
                bands: extractor.band_powers(t, &wave)?,
            })
        })
        .collect()
}

/// CSP inputs for a whole dataset: `series[trial][band]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    pub bands: Vec<BandName>,
    pub differenced: bool,
    pub labels: Vec<usize>,
    pub n_classes: usize,
    pub series: Vec<Vec<DMatrix<f64>>>,
}

impl FeatureSet {
    pub fn from_powers(powers: &[TrialPowers], differentiate_series: bool, n_classes: usize) -> Result<Self> {
        let bands: Vec<BandName> = powers
            .first()
            .map(|p| p.bands.iter().map(|s| s.band).collect())
            .unwrap_or_default();
        let series = powers
            .iter()
            .map(|p| {
                p.bands
                    .iter()
                    .map(|s| {
                        if differentiate_series {
                            Ok(differentiate(s)?.values)
                        } else {
                            Ok(s.power.clone())
                        }
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            bands,
            differenced: differentiate_series,
            labels: powers.iter().map(|p| p.label).collect(),
            n_classes,
            series,
        })
    }

    /// Band powers plus optional differencing, straight from raw trials.
    pub fn from_trials(trials: &[Trial], cfg: &PipelineConfig, bands: &[BandName], n_classes: usize) -> Result<Self> {
        let powers = compute_powers(trials, cfg.dsp, bands)?;
        Self::from_powers(&powers, cfg.differentiate, n_classes)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn band_position(&self, band: BandName) -> Result<usize> {
        self.bands.iter().position(|&b| b == band).ok_or(PipelineError::MissingBand(band))
    }
}

/// Fitted CSP sets (one per band) and classifiers (`[band][classifier]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineModel {
    pub config: PipelineConfig,
    pub n_classes: usize,
    pub bands: Vec<BandName>,
    pub classifiers: Vec<ClassifierId>,
    pub csp: Vec<CspSet>,
    pub models: Vec<Vec<Model>>,
}

impl PipelineModel {
    /// Fits every `(band, classifier)` base model on the `train` trials.
    /// Each fit gets its own seed derived from the config seed and the
    /// catalog positions, so results do not depend on scheduling.
    pub fn fit(
        features: &FeatureSet,
        train: &[usize],
        cfg: &PipelineConfig,
        bands: &[BandName],
        classifiers: &[ClassifierId],
    ) -> Result<Self> {
        let fitted: Vec<(CspSet, Vec<Model>)> = bands
            .par_iter()
            .map(|&band| {
                let bp = features.band_position(band)?;
                let labeled: Vec<LabeledSeries<'_>> = train
                    .iter()
                    .map(|&i| LabeledSeries {
                        values: &features.series[i][bp],
                        label: features.labels[i],
                    })
                    .collect();
                let set = csp::fit_csp_ovr(&labeled, band, cfg.components_for(band), features.n_classes)?;
                let rows = train
                    .iter()
                    .map(|&i| set.transform(&features.series[i][bp]))
                    .collect::<std::result::Result<Vec<_>, _>>()?;
                let data = Dataset::from_rows(&rows, train.iter().map(|&i| features.labels[i]).collect(), features.n_classes)?;
                let models = classifiers
                    .par_iter()
                    .map(|&id| {
                        let seed = derive_seed(cfg.seed, &[band.index() as u64, id.index() as u64]);
                        classifiers::fit(id, &data, &cfg.classifiers, seed)
                    })
                    .collect::<std::result::Result<Vec<_>, _>>()?;
                Ok((set, models))
            })
            .collect::<Result<Vec<_>>>()?;
        let (csp, models) = fitted.into_iter().unzip();
        Ok(Self {
            config: cfg.clone(),
            n_classes: features.n_classes,
            bands: bands.to_vec(),
            classifiers: classifiers.to_vec(),
            csp,
            models,
        })
    }

    pub fn channels(&self) -> usize {
        self.csp[0].channels()
    }

    /// Base-classifier scores for one trial, given its series in model
    /// band order.
    fn tensor_from(&self, series: &[&DMatrix<f64>]) -> Result<ScoreTensor> {
        let mut data = Vec::with_capacity(self.bands.len() * self.classifiers.len() * self.n_classes);
        for (b, set) in self.csp.iter().enumerate() {
            let x = set.transform(series[b])?;
            for m in &self.models[b] {
                data.extend(classifiers::predict_scores(m, &x)?.into_inner());
            }
        }
        Ok(ScoreTensor::new(self.bands.clone(), self.classifiers.clone(), self.n_classes, data)?)
    }

    /// Score tensor of trial `index` of a feature set.
    pub fn score_tensor(&self, features: &FeatureSet, index: usize) -> Result<ScoreTensor> {
        let series = self
            .bands
            .iter()
            .map(|&b| Ok(&features.series[index][features.band_position(b)?]))
            .collect::<Result<Vec<_>>>()?;
        self.tensor_from(&series)
    }

    /// Runs a raw trial through the whole pipeline and fuses with the
    /// model's own fusion config.
    pub fn predict_trial(&self, trial: &Trial) -> Result<Fused> {
        if trial.channels() != self.channels() {
            return Err(CspError::ChannelMismatch {
                expected: self.channels(),
                found: trial.channels(),
            }
            .into());
        }
        let extractor = BandPowerExtractor::new(self.config.dsp)?;
        let wave: Vec<_> = self.bands.iter().map(|b| b.band()).collect();
        let series = extractor
            .band_powers(trial, &wave)?
            .into_iter()
            .map(|p| {
                if self.config.differentiate {
                    Ok(differentiate(&p)?.values)
                } else {
                    Ok(p.power)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<&DMatrix<f64>> = series.iter().collect();
        Ok(fuse(&self.tensor_from(&refs)?, &self.config.fusion)?)
    }
}
