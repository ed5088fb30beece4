//! Aggregator-pair grids and the exhaustive band × classifier × aggregator
//! search, evaluated from a [`ScoreCache`].
//!
//! The frequency phase depends only on the band subset, the classifier and
//! the frequency aggregator, so its collective vectors are computed once per
//! test trial and shared by every classifier subset and classifier-phase
//! aggregator. The arithmetic is the same as [`crate::fusion::fuse`], so
//! every entry equals an independent run of that config.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{mean_std, EvalError, Result, ScoreCache};
use crate::aggregation::{Aggregation, AggregatorId, Cf1f2Pair};
use crate::classifiers::{argmax, ClassifierId};
use crate::dsp::BandName;
use crate::fusion::{aggregate_rows, FusionConfig, FusionMode};

/// Number of nonempty band subsets times nonempty classifier subsets.
pub fn subset_pair_count(bands: usize, classifiers: usize) -> u64 {
    ((1u64 << bands) - 1) * ((1u64 << classifiers) - 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggPairs {
    /// All 17 × 17 (frequency, classifier) pairs.
    All,
    List(Vec<(AggregatorId, AggregatorId)>),
}

impl AggPairs {
    pub fn pairs(&self) -> Vec<(AggregatorId, AggregatorId)> {
        match self {
            AggPairs::All => AggregatorId::ALL
                .iter()
                .flat_map(|&f| AggregatorId::ALL.iter().map(move |&c| (f, c)))
                .collect(),
            AggPairs::List(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub bands: Vec<BandName>,
    pub classifiers: Vec<ClassifierId>,
    pub agg_pairs: AggPairs,
    /// Entries kept in the report.
    pub top_n: usize,
    #[serde(default, skip_serializing_if = "Cf1f2Pair::is_default")]
    pub cf1f2: Cf1f2Pair,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            bands: BandName::ALL.to_vec(),
            classifiers: ClassifierId::ALL.to_vec(),
            agg_pairs: AggPairs::All,
            top_n: 20,
            cf1f2: Cf1f2Pair::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchEntry {
    pub rank: usize,
    pub bands: Vec<BandName>,
    pub classifiers: Vec<ClassifierId>,
    pub freq_agg: AggregatorId,
    pub class_agg: AggregatorId,
    pub accuracy: f64,
    pub std: f64,
}

impl SearchEntry {
    pub fn fusion_config(&self) -> FusionConfig {
        FusionConfig::emf(&self.bands, &self.classifiers, self.freq_agg, self.class_agg)
    }
}

/// One evaluated config, compactly: subset masks over the search's band
/// and classifier lists plus the pair index.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Scored {
    band_mask: u32,
    clf_mask: u32,
    pair: u32,
    mean: f64,
    std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub bands: Vec<BandName>,
    pub classifiers: Vec<ClassifierId>,
    pub subset_pairs: u64,
    pub agg_pairs: usize,
    pub configs_evaluated: u64,
    pub top: Vec<SearchEntry>,
    #[serde(skip)]
    ranked: Vec<Scored>,
    #[serde(skip)]
    pairs: Vec<(AggregatorId, AggregatorId)>,
}

impl SearchReport {
    /// Mean accuracy of one searched config, if it was part of the search.
    pub fn accuracy_of(&self, cfg: &FusionConfig) -> Option<f64> {
        let band_mask = mask_of(&self.bands, &cfg.bands)?;
        let clf_mask = mask_of(&self.classifiers, &cfg.classifiers)?;
        let pair = self.pairs.iter().position(|&p| p == (cfg.freq_agg, cfg.class_agg))? as u32;
        self.ranked
            .iter()
            .find(|s| s.band_mask == band_mask && s.clf_mask == clf_mask && s.pair == pair)
            .map(|s| s.mean)
    }

    /// The entry at 1-based `rank`.
    pub fn entry(&self, rank: usize) -> Option<SearchEntry> {
        let s = self.ranked.get(rank.checked_sub(1)?)?;
        Some(self.to_entry(rank, s))
    }

    /// Every ranked config.
    pub fn len(&self) -> usize {
        self.ranked.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranked.is_empty()
    }

    fn to_entry(&self, rank: usize, s: &Scored) -> SearchEntry {
        let (freq_agg, class_agg) = self.pairs[s.pair as usize];
        SearchEntry {
            rank,
            bands: select(&self.bands, s.band_mask),
            classifiers: select(&self.classifiers, s.clf_mask),
            freq_agg,
            class_agg,
            accuracy: s.mean,
            std: s.std,
        }
    }

    /// Ranked table as CSV, one row per reported entry.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rank,bands,classifiers,freq_agg,class_agg,accuracy,std\n");
        for e in &self.top {
            let bands: Vec<&str> = e.bands.iter().map(|b| b.token()).collect();
            let clfs: Vec<&str> = e.classifiers.iter().map(|c| c.token()).collect();
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                e.rank,
                bands.join("+"),
                clfs.join("+"),
                e.freq_agg,
                e.class_agg,
                e.accuracy,
                e.std
            ));
        }
        out
    }
}

fn mask_of<T: PartialEq>(all: &[T], subset: &[T]) -> Option<u32> {
    let mut mask = 0;
    for s in subset {
        mask |= 1 << all.iter().position(|a| a == s)?;
    }
    Some(mask)
}

fn select<T: Copy>(all: &[T], mask: u32) -> Vec<T> {
    all.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &x)| x).collect()
}

/// Frequency-phase collectives of every trial in the cache:
/// `[split][trial]` → flat `[band_mask - 1][classifier][freq_agg][class]`.
struct Collectives {
    n_clf: usize,
    n_freq: usize,
    k: usize,
    data: Vec<Vec<Vec<f64>>>,
}

impl Collectives {
    fn build(cache: &ScoreCache, bands: &[usize], clfs: &[usize], freq: &[Aggregation]) -> Self {
        let k = cache.n_classes;
        let n_masks = (1usize << bands.len()) - 1;
        let data = cache
            .splits
            .iter()
            .map(|split| {
                split
                    .tensors
                    .par_iter()
                    .map(|t| {
                        let mut out = vec![0.0; n_masks * clfs.len() * freq.len() * k];
                        let mut chosen = Vec::with_capacity(bands.len());
                        for mask in 1..=n_masks {
                            chosen.clear();
                            chosen.extend((0..bands.len()).filter(|i| mask >> i & 1 == 1).map(|i| bands[i]));
                            for (ci, &c) in clfs.iter().enumerate() {
                                for (fi, agg) in freq.iter().enumerate() {
                                    let off = (((mask - 1) * clfs.len() + ci) * freq.len() + fi) * k;
                                    aggregate_rows(chosen.len(), |i| t.get(chosen[i], c), agg, &mut out[off..off + k]);
                                }
                            }
                        }
                        out
                    })
                    .collect()
            })
            .collect();
        Self {
            n_clf: clfs.len(),
            n_freq: freq.len(),
            k,
            data,
        }
    }

    fn row<'a>(&self, trial: &'a [f64], band_mask: usize, clf: usize, freq: usize) -> &'a [f64] {
        let off = (((band_mask - 1) * self.n_clf + clf) * self.n_freq + freq) * self.k;
        &trial[off..off + self.k]
    }
}

/// Evaluates every `(band_mask, clf_mask)` × pair, in that nesting order.
fn evaluate_all(
    cache: &ScoreCache,
    bands: &[BandName],
    classifiers: &[ClassifierId],
    subsets: &[(u32, u32)],
    pairs: &[(AggregatorId, AggregatorId)],
    cf1f2: Cf1f2Pair,
) -> Result<Vec<Scored>> {
    let band_pos = positions(&cache.bands, bands, "band")?;
    let clf_pos = positions(&cache.classifiers, classifiers, "classifier")?;
    let mut freq_ids: Vec<AggregatorId> = pairs.iter().map(|p| p.0).collect();
    freq_ids.sort();
    freq_ids.dedup();
    let freq: Vec<Aggregation> = freq_ids.iter().map(|&id| Aggregation::new(id, cf1f2)).collect();
    let pair_freq: Vec<usize> = pairs.iter().map(|p| freq_ids.binary_search(&p.0).unwrap()).collect();
    let class_aggs: Vec<Aggregation> = pairs.iter().map(|p| Aggregation::new(p.1, cf1f2)).collect();
    let coll = Collectives::build(cache, &band_pos, &clf_pos, &freq);
    let k = cache.n_classes;

    let scored: Vec<Vec<Scored>> = subsets
        .par_iter()
        .map(|&(band_mask, clf_mask)| {
            let chosen: Vec<usize> = (0..classifiers.len()).filter(|i| clf_mask >> i & 1 == 1).collect();
            let mut out = vec![0.0; k];
            (0..pairs.len())
                .map(|p| {
                    let accs: Vec<f64> = cache
                        .splits
                        .iter()
                        .zip(&coll.data)
                        .map(|(split, trials)| {
                            let correct = trials
                                .iter()
                                .zip(&split.labels)
                                .filter(|(trial, &label)| {
                                    aggregate_rows(
                                        chosen.len(),
                                        |i| coll.row(trial, band_mask as usize, chosen[i], pair_freq[p]),
                                        &class_aggs[p],
                                        &mut out,
                                    );
                                    argmax(&out) == label
                                })
                                .count();
                            correct as f64 / split.test.len() as f64
                        })
                        .collect();
                    let (mean, std) = mean_std(&accs);
                    Scored {
                        band_mask,
                        clf_mask,
                        pair: p as u32,
                        mean,
                        std,
                    }
                })
                .collect()
        })
        .collect();
    Ok(scored.into_iter().flatten().collect())
}

fn positions<T: PartialEq + std::fmt::Display>(have: &[T], want: &[T], what: &str) -> Result<Vec<usize>> {
    want.iter()
        .map(|w| {
            have.iter()
                .position(|h| h == w)
                .ok_or_else(|| EvalError::InvalidInput(format!("{what} `{w}` is not in the score cache")))
        })
        .collect()
}

/// Searches every nonempty band subset × nonempty classifier subset ×
/// aggregator pair. Ranking is by mean accuracy (descending), then fewer
/// classifiers, fewer bands, and finally enumeration order (band mask,
/// classifier mask, pair position).
pub fn oemf_search(cache: &ScoreCache, options: &SearchOptions) -> Result<SearchReport> {
    let mut bands = options.bands.clone();
    let mut classifiers = options.classifiers.clone();
    bands.sort();
    bands.dedup();
    classifiers.sort();
    classifiers.dedup();
    if bands.is_empty() || classifiers.is_empty() {
        return Err(EvalError::InvalidInput("search needs at least one band and one classifier".into()));
    }
    let pairs = options.agg_pairs.pairs();
    if pairs.is_empty() {
        return Err(EvalError::InvalidInput("no aggregator pairs".into()));
    }
    let subsets: Vec<(u32, u32)> = (1..1u32 << bands.len())
        .flat_map(|b| (1..1u32 << classifiers.len()).map(move |c| (b, c)))
        .collect();
    let mut ranked = evaluate_all(cache, &bands, &classifiers, &subsets, &pairs, options.cf1f2)?;
    ranked.sort_by(|a, b| {
        b.mean
            .partial_cmp(&a.mean)
            .unwrap_or(Ordering::Equal)
            .then(a.clf_mask.count_ones().cmp(&b.clf_mask.count_ones()))
            .then(a.band_mask.count_ones().cmp(&b.band_mask.count_ones()))
            .then(a.band_mask.cmp(&b.band_mask))
            .then(a.clf_mask.cmp(&b.clf_mask))
            .then(a.pair.cmp(&b.pair))
    });
    let mut report = SearchReport {
        subset_pairs: subset_pair_count(bands.len(), classifiers.len()),
        agg_pairs: pairs.len(),
        configs_evaluated: ranked.len() as u64,
        bands,
        classifiers,
        top: Vec::new(),
        ranked,
        pairs,
    };
    report.top = report
        .ranked
        .iter()
        .take(options.top_n)
        .enumerate()
        .map(|(i, s)| report.to_entry(i + 1, s))
        .collect();
    Ok(report)
}

/// Accuracy of all 17 × 17 aggregator pairs for one band/classifier set.
/// Rows are the frequency-phase aggregator, columns the classifier-phase
/// aggregator, both in catalog order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub mode: FusionMode,
    pub bands: Vec<BandName>,
    pub classifiers: Vec<ClassifierId>,
    pub matrix: Vec<Vec<f64>>,
    /// Highest cell; ties go to the first in row-major order.
    pub best: (AggregatorId, AggregatorId, f64),
}

impl GridResult {
    pub fn cell(&self, freq: AggregatorId, class: AggregatorId) -> f64 {
        self.matrix[freq.index()][class.index()]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("freq_agg");
        for id in AggregatorId::ALL {
            out.push(',');
            out.push_str(id.token());
        }
        out.push('\n');
        for (r, row) in self.matrix.iter().enumerate() {
            out.push_str(AggregatorId::ALL[r].token());
            for v in row {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

pub fn aggregator_grid(
    cache: &ScoreCache,
    bands: &[BandName],
    classifiers: &[ClassifierId],
    cf1f2: Cf1f2Pair,
) -> Result<GridResult> {
    let mut bands = bands.to_vec();
    let mut classifiers = classifiers.to_vec();
    bands.sort();
    bands.dedup();
    classifiers.sort();
    classifiers.dedup();
    if bands.is_empty() || classifiers.is_empty() {
        return Err(EvalError::InvalidInput("grid needs at least one band and one classifier".into()));
    }
    let full = ((1u32 << bands.len()) - 1, (1u32 << classifiers.len()) - 1);
    let pairs = AggPairs::All.pairs();
    let scored = evaluate_all(cache, &bands, &classifiers, &[full], &pairs, cf1f2)?;
    let n = AggregatorId::ALL.len();
    let matrix: Vec<Vec<f64>> = scored.chunks(n).map(|row| row.iter().map(|s| s.mean).collect()).collect();
    let mut best = (AggregatorId::ALL[0], AggregatorId::ALL[0], matrix[0][0]);
    for (r, row) in matrix.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            if v > best.2 {
                best = (AggregatorId::ALL[r], AggregatorId::ALL[c], v);
            }
        }
    }
    Ok(GridResult {
        mode: FusionMode::Emf,
        bands,
        classifiers,
        matrix,
        best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subset_counts() {
        assert_eq!(subset_pair_count(2, 2), 9);
        assert_eq!(subset_pair_count(6, 5), 1953);
        assert_eq!(subset_pair_count(1, 1), 1);
    }

    #[test]
    fn masks_round_trip() {
        let all = BandName::ALL;
        let m = mask_of(&all, &[BandName::Theta, BandName::All]).unwrap();
        assert_eq!(m, 0b100010);
        assert_eq!(select(&all, m), vec![BandName::Theta, BandName::All]);
        assert_eq!(mask_of(&all[..2], &[BandName::Beta]), None);
    }

    #[test]
    fn pair_lists() {
        assert_eq!(AggPairs::All.pairs().len(), 289);
        assert_eq!(AggPairs::All.pairs()[18], (AggregatorId::Median, AggregatorId::Median));
    }
}
