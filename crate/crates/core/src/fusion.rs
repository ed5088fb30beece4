//! Two-phase decision fusion.
//!
//! The frequency phase aggregates each classifier type's scores across
//! bands into a collective vector. The classifier phase aggregates those
//! collectives across types. The decision is the argmax. Each phase output
//! is renormalized to unit sum; an all-zero vector becomes uniform and the
//! trial is flagged.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aggregation::{Aggregation, AggregatorId, Cf1f2Pair};
use crate::classifiers::{argmax, normalize_in_place, ClassifierId, ScoreVector};
use crate::dsp::BandName;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FusionError {
    #[error("empty band subset")]
    EmptyBands,
    #[error("empty classifier subset")]
    EmptyClassifiers,
    #[error("invalid fusion config: {0}")]
    InvalidConfig(String),
    #[error("config does not match score tensor: {0}")]
    Mismatch(String),
    #[error("invalid score tensor: {0}")]
    InvalidScores(String),
    #[error("unknown fusion mode `{0}`")]
    UnknownMode(String),
}

pub type Result<T> = std::result::Result<T, FusionError>;

/// Base-classifier outputs for one trial, indexed `[band][classifier][class]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTensor {
    bands: Vec<BandName>,
    classifiers: Vec<ClassifierId>,
    n_classes: usize,
    data: Vec<f64>,
}

impl ScoreTensor {
    /// `data` is laid out band-major, then classifier, then class. Every
    /// slice must be a valid score vector.
    pub fn new(bands: Vec<BandName>, classifiers: Vec<ClassifierId>, n_classes: usize, data: Vec<f64>) -> Result<Self> {
        if bands.is_empty() {
            return Err(FusionError::EmptyBands);
        }
        if classifiers.is_empty() {
            return Err(FusionError::EmptyClassifiers);
        }
        if n_classes < 2 {
            return Err(FusionError::InvalidScores(format!("{n_classes} classes")));
        }
        if data.len() != bands.len() * classifiers.len() * n_classes {
            return Err(FusionError::InvalidScores(format!(
                "{} values for {}x{}x{}",
                data.len(),
                bands.len(),
                classifiers.len(),
                n_classes
            )));
        }
        for (i, s) in data.chunks(n_classes).enumerate() {
            let sum: f64 = s.iter().sum();
            if s.iter().any(|v| !(0.0..=1.0).contains(v)) || (sum - 1.0).abs() > 1e-9 {
                let (b, c) = (i / classifiers.len(), i % classifiers.len());
                return Err(FusionError::InvalidScores(format!(
                    "slice ({}, {}) is not a score vector: {s:?}",
                    bands[b], classifiers[c]
                )));
            }
        }
        Ok(Self {
            bands,
            classifiers,
            n_classes,
            data,
        })
    }

    /// Builds from nested `[band][classifier]` score vectors.
    pub fn from_nested(bands: Vec<BandName>, classifiers: Vec<ClassifierId>, scores: &[Vec<ScoreVector>]) -> Result<Self> {
        let n_classes = scores.first().and_then(|r| r.first()).map_or(0, ScoreVector::len);
        if scores.len() != bands.len() || scores.iter().any(|r| r.len() != classifiers.len()) {
            return Err(FusionError::InvalidScores("nested shape does not match labels".into()));
        }
        let data = scores.iter().flatten().flat_map(|s| s.as_slice().iter().copied()).collect();
        Self::new(bands, classifiers, n_classes, data)
    }

    pub fn bands(&self) -> &[BandName] {
        &self.bands
    }

    pub fn classifiers(&self) -> &[ClassifierId] {
        &self.classifiers
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    /// Scores of classifier position `c` on band position `b`.
    pub fn get(&self, b: usize, c: usize) -> &[f64] {
        let start = (b * self.classifiers.len() + c) * self.n_classes;
        &self.data[start..start + self.n_classes]
    }

    /// Restricts to the given bands and classifiers, in the given order.
    pub fn select(&self, bands: &[BandName], classifiers: &[ClassifierId]) -> Result<Self> {
        let bi = positions(&self.bands, bands, "band")?;
        let ci = positions(&self.classifiers, classifiers, "classifier")?;
        let mut data = Vec::with_capacity(bi.len() * ci.len() * self.n_classes);
        for &b in &bi {
            for &c in &ci {
                data.extend_from_slice(self.get(b, c));
            }
        }
        Self::new(bands.to_vec(), classifiers.to_vec(), self.n_classes, data)
    }
}

fn positions<T: PartialEq + fmt::Display>(have: &[T], want: &[T], what: &str) -> Result<Vec<usize>> {
    want.iter()
        .map(|w| {
            have.iter()
                .position(|h| h == w)
                .ok_or_else(|| FusionError::Mismatch(format!("{what} `{w}` not in tensor")))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FusionMode {
    /// Arithmetic mean of every selected base classifier's scores.
    Traditional,
    /// Two phases sharing one aggregator.
    Mff,
    /// Two phases with independent aggregators.
    Emf,
}

impl fmt::Display for FusionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FusionMode::Traditional => "traditional",
            FusionMode::Mff => "mff",
            FusionMode::Emf => "emf",
        })
    }
}

impl FromStr for FusionMode {
    type Err = FusionError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "traditional" => Ok(FusionMode::Traditional),
            "mff" => Ok(FusionMode::Mff),
            "emf" => Ok(FusionMode::Emf),
            other => Err(FusionError::UnknownMode(other.to_string())),
        }
    }
}

/// One point of the fusion design space.
///
/// Deserialization validates; bands and classifiers are kept in catalog
/// order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawFusionConfig")]
pub struct FusionConfig {
    pub mode: FusionMode,
    pub bands: Vec<BandName>,
    pub classifiers: Vec<ClassifierId>,
    pub freq_agg: AggregatorId,
    pub class_agg: AggregatorId,
    /// Parameters of `cf1f2` when either phase uses it.
    #[serde(default, skip_serializing_if = "Cf1f2Pair::is_default")]
    pub cf1f2: Cf1f2Pair,
}

#[derive(Deserialize)]
struct RawFusionConfig {
    mode: FusionMode,
    bands: Vec<BandName>,
    classifiers: Vec<ClassifierId>,
    freq_agg: AggregatorId,
    class_agg: AggregatorId,
    #[serde(default)]
    cf1f2: Cf1f2Pair,
}

impl TryFrom<RawFusionConfig> for FusionConfig {
    type Error = FusionError;

    fn try_from(r: RawFusionConfig) -> Result<Self> {
        FusionConfig {
            mode: r.mode,
            bands: r.bands,
            classifiers: r.classifiers,
            freq_agg: r.freq_agg,
            class_agg: r.class_agg,
            cf1f2: r.cf1f2,
        }
        .validated()
    }
}

impl Default for FusionConfig {
    /// Full EMF: every band, every classifier, Choquet then Min.
    fn default() -> Self {
        Self {
            mode: FusionMode::Emf,
            bands: BandName::ALL.to_vec(),
            classifiers: ClassifierId::ALL.to_vec(),
            freq_agg: AggregatorId::Choquet,
            class_agg: AggregatorId::Min,
            cf1f2: Cf1f2Pair::default(),
        }
    }
}

impl FusionConfig {
    pub fn emf(bands: &[BandName], classifiers: &[ClassifierId], freq_agg: AggregatorId, class_agg: AggregatorId) -> Self {
        Self {
            mode: FusionMode::Emf,
            bands: bands.to_vec(),
            classifiers: classifiers.to_vec(),
            freq_agg,
            class_agg,
            cf1f2: Cf1f2Pair::default(),
        }
    }

    pub fn traditional(bands: &[BandName], classifiers: &[ClassifierId]) -> Self {
        Self {
            mode: FusionMode::Traditional,
            freq_agg: AggregatorId::Mean,
            class_agg: AggregatorId::Mean,
            ..Self::emf(bands, classifiers, AggregatorId::Mean, AggregatorId::Mean)
        }
    }

    /// Checks the invariants and sorts subsets into catalog order.
    pub fn validated(mut self) -> Result<Self> {
        if self.bands.is_empty() {
            return Err(FusionError::EmptyBands);
        }
        if self.classifiers.is_empty() {
            return Err(FusionError::EmptyClassifiers);
        }
        self.bands.sort();
        self.classifiers.sort();
        if self.bands.windows(2).any(|w| w[0] == w[1]) {
            return Err(FusionError::InvalidConfig("duplicate band".into()));
        }
        if self.classifiers.windows(2).any(|w| w[0] == w[1]) {
            return Err(FusionError::InvalidConfig("duplicate classifier".into()));
        }
        if self.mode == FusionMode::Mff && self.freq_agg != self.class_agg {
            return Err(FusionError::InvalidConfig("mff requires equal aggregators".into()));
        }
        Ok(self)
    }

    pub fn freq_aggregation(&self) -> Aggregation {
        Aggregation::new(self.freq_agg, self.cf1f2)
    }

    pub fn class_aggregation(&self) -> Aggregation {
        Aggregation::new(self.class_agg, self.cf1f2)
    }
}

/// A fused decision plus how many phase outputs needed the uniform fallback.
#[derive(Debug, Clone, PartialEq)]
pub struct Fused {
    pub scores: ScoreVector,
    pub label: usize,
    pub fallbacks: usize,
}

/// Aggregates `get(i)[k]` over `i in 0..n` for each class, into `out`,
/// then renormalizes. Returns true on uniform fallback.
pub(crate) fn aggregate_rows<'a>(
    n: usize,
    get: impl Fn(usize) -> &'a [f64],
    agg: &Aggregation,
    out: &mut [f64],
) -> bool {
    let mut column = [0.0f64; 16];
    let mut heap;
    let buf: &mut [f64] = if n <= column.len() {
        &mut column[..n]
    } else {
        heap = vec![0.0; n];
        &mut heap
    };
    for (k, o) in out.iter_mut().enumerate() {
        for (i, slot) in buf.iter_mut().enumerate() {
            *slot = get(i)[k];
        }
        *o = agg.eval(buf);
    }
    normalize_in_place(out)
}

/// Collective vector of each classifier type, aggregated across bands.
pub fn frequency_phase(t: &ScoreTensor, agg: Aggregation) -> Result<(Vec<ScoreVector>, usize)> {
    let mut fallbacks = 0;
    let rows = (0..t.classifiers.len())
        .map(|c| {
            let mut out = vec![0.0; t.n_classes];
            fallbacks += usize::from(aggregate_rows(t.bands.len(), |b| t.get(b, c), &agg, &mut out));
            ScoreVector::from_normalized(out)
        })
        .collect();
    Ok((rows, fallbacks))
}

/// Aggregates collective vectors across classifier types.
pub fn classifier_phase(collectives: &[ScoreVector], agg: Aggregation) -> Result<(ScoreVector, bool)> {
    let first = collectives.first().ok_or(FusionError::EmptyClassifiers)?;
    if collectives.iter().any(|c| c.len() != first.len()) {
        return Err(FusionError::InvalidScores("collectives differ in class count".into()));
    }
    let mut out = vec![0.0; first.len()];
    let fell_back = aggregate_rows(collectives.len(), |i| collectives[i].as_slice(), &agg, &mut out);
    Ok((ScoreVector::from_normalized(out), fell_back))
}

/// Argmax with ties to the lowest class index.
pub fn decide(scores: &ScoreVector) -> usize {
    argmax(scores.as_slice())
}

pub fn fuse(t: &ScoreTensor, cfg: &FusionConfig) -> Result<Fused> {
    let cfg = cfg.clone().validated()?;
    let t = t.select(&cfg.bands, &cfg.classifiers)?;
    match cfg.mode {
        FusionMode::Traditional => {
            let n = (t.bands.len() * t.classifiers.len()) as f64;
            let mut out = vec![0.0; t.n_classes];
            for s in t.data.chunks(t.n_classes) {
                for (o, v) in out.iter_mut().zip(s) {
                    *o += v / n;
                }
            }
            let fallbacks = usize::from(normalize_in_place(&mut out));
            let scores = ScoreVector::from_normalized(out);
            Ok(Fused {
                label: decide(&scores),
                scores,
                fallbacks,
            })
        }
        FusionMode::Mff | FusionMode::Emf => {
            let (collectives, mut fallbacks) = frequency_phase(&t, cfg.freq_aggregation())?;
            let (scores, fb) = classifier_phase(&collectives, cfg.class_aggregation())?;
            fallbacks += usize::from(fb);
            Ok(Fused {
                label: decide(&scores),
                scores,
                fallbacks,
            })
        }
    }
}
