//! Moving-window band power and first differencing.
//!
//! Each channel is cut into `window`-sample segments every `step` samples
//! (50 and 5 by default, i.e. 45 samples of overlap). The power of a band in
//! one segment is the mean squared DFT magnitude over the bins whose centre
//! frequency `k·fs/window` lies inside the band, edges included. No taper.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use thiserror::Error;

const EDGE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DspError {
    #[error(
        "no DFT bin of a {window}-point window at {fs} Hz (resolution {resolution} Hz) lies in the {band} band; \
         increase the window length"
    )]
    EmptyBand {
        band: BandName,
        fs: f64,
        window: usize,
        resolution: f64,
    },
    #[error("trial has {samples} samples, shorter than the {window}-sample window")]
    TooShort { samples: usize, window: usize },
    #[error("differencing needs at least 2 windows, got {windows}")]
    TooFewWindows { windows: usize },
    #[error("invalid dsp configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown wave band `{0}`")]
    UnknownBand(String),
}

pub type Result<T> = std::result::Result<T, DspError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BandName {
    Delta,
    Theta,
    Alpha,
    Beta,
    Smr,
    All,
}

impl BandName {
    pub const ALL: [BandName; 6] = [
        BandName::Delta,
        BandName::Theta,
        BandName::Alpha,
        BandName::Beta,
        BandName::Smr,
        BandName::All,
    ];

    pub fn token(self) -> &'static str {
        match self {
            BandName::Delta => "delta",
            BandName::Theta => "theta",
            BandName::Alpha => "alpha",
            BandName::Beta => "beta",
            BandName::Smr => "smr",
            BandName::All => "all",
        }
    }

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|&b| b == self).unwrap()
    }

    pub fn band(self) -> WaveBand {
        let (lo_hz, hi_hz) = match self {
            BandName::Delta => (1.0, 3.0),
            BandName::Theta => (4.0, 7.0),
            BandName::Alpha => (8.0, 13.0),
            BandName::Beta => (14.0, 30.0),
            BandName::Smr => (13.0, 15.0),
            BandName::All => (1.0, 30.0),
        };
        WaveBand {
            name: self,
            lo_hz,
            hi_hz,
        }
    }
}

impl fmt::Display for BandName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for BandName {
    type Err = DspError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|b| b.token() == s)
            .ok_or_else(|| DspError::UnknownBand(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveBand {
    pub name: BandName,
    pub lo_hz: f64,
    pub hi_hz: f64,
}

impl WaveBand {
    pub fn contains(&self, hz: f64) -> bool {
        hz >= self.lo_hz - EDGE_TOLERANCE && hz <= self.hi_hz + EDGE_TOLERANCE
    }
}

/// The six bands in catalog order: delta, theta, alpha, beta, smr, all.
pub fn band_catalog() -> Vec<WaveBand> {
    BandName::ALL.iter().map(|b| b.band()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DspConfig {
    pub window: usize,
    pub step: usize,
}

impl Default for DspConfig {
    fn default() -> Self {
        Self { window: 50, step: 5 }
    }
}

impl DspConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window < 2 {
            return Err(DspError::InvalidConfig(format!("window must be >= 2, got {}", self.window)));
        }
        if self.step == 0 {
            return Err(DspError::InvalidConfig("step must be >= 1".into()));
        }
        Ok(())
    }
}

/// Number of `window`-sample segments taken every `step` samples.
pub fn window_count(samples: usize, window: usize, step: usize) -> usize {
    if samples < window {
        0
    } else {
        (samples - window) / step + 1
    }
}

/// One labeled multichannel recording, stored channels × time.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub samples: DMatrix<f64>,
    pub fs: f64,
    pub label: usize,
}

impl Trial {
    pub fn channels(&self) -> usize {
        self.samples.nrows()
    }

    pub fn len(&self) -> usize {
        self.samples.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.ncols() == 0
    }
}

/// Band power of every channel in every window (channels × windows).
#[derive(Debug, Clone, PartialEq)]
pub struct BandPowerSeries {
    pub band: BandName,
    pub power: DMatrix<f64>,
}

impl BandPowerSeries {
    pub fn channels(&self) -> usize {
        self.power.nrows()
    }

    pub fn windows(&self) -> usize {
        self.power.ncols()
    }

    /// Promotes the series to CSP input without differencing.
    pub fn into_series(self) -> FeatureSeries {
        FeatureSeries {
            band: self.band,
            differenced: false,
            values: self.power,
        }
    }
}

/// CSP input: a band-power series, optionally differenced (so entries may
/// be negative).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSeries {
    pub band: BandName,
    pub differenced: bool,
    pub values: DMatrix<f64>,
}

/// First difference along time: `out[c][t] = power[c][t+1] − power[c][t]`.
pub fn differentiate(series: &BandPowerSeries) -> Result<FeatureSeries> {
    let windows = series.windows();
    if windows < 2 {
        return Err(DspError::TooFewWindows { windows });
    }
    let p = &series.power;
    let values = DMatrix::from_fn(p.nrows(), windows - 1, |c, t| p[(c, t + 1)] - p[(c, t)]);
    Ok(FeatureSeries {
        band: series.band,
        differenced: true,
        values,
    })
}

/// DFT bins of a `window`-point transform at `fs` that fall inside `band`.
pub fn band_bins(band: &WaveBand, fs: f64, window: usize) -> Result<Vec<usize>> {
    let resolution = fs / window as f64;
    let bins: Vec<usize> = (0..=window / 2)
        .filter(|&k| band.contains(k as f64 * resolution))
        .collect();
    if bins.is_empty() {
        return Err(DspError::EmptyBand {
            band: band.name,
            fs,
            window,
            resolution,
        });
    }
    Ok(bins)
}

/// Computes band-power series with a shared FFT plan.
#[derive(Clone)]
pub struct BandPowerExtractor {
    config: DspConfig,
    fft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for BandPowerExtractor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BandPowerExtractor").field("config", &self.config).finish()
    }
}

impl BandPowerExtractor {
    pub fn new(config: DspConfig) -> Result<Self> {
        config.validate()?;
        let fft = FftPlanner::new().plan_fft_forward(config.window);
        Ok(Self { config, fft })
    }

    pub fn config(&self) -> DspConfig {
        self.config
    }

    /// Squared DFT magnitudes of every window: one `window/2 + 1` spectrum
    /// per (channel, window), indexed `[channel][window][bin]`.
    pub fn spectra(&self, trial: &Trial) -> Result<Vec<Vec<Vec<f64>>>> {
        let DspConfig { window, step } = self.config;
        if trial.len() < window {
            return Err(DspError::TooShort {
                samples: trial.len(),
                window,
            });
        }
        let n_windows = window_count(trial.len(), window, step);
        let mut buf = vec![Complex::new(0.0, 0.0); window];
        let mut scratch = vec![Complex::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
        let mut out = Vec::with_capacity(trial.channels());
        for c in 0..trial.channels() {
            let row = trial.samples.row(c);
            let mut per_window = Vec::with_capacity(n_windows);
            for w in 0..n_windows {
                let start = w * step;
                for (i, slot) in buf.iter_mut().enumerate() {
                    *slot = Complex::new(row[start + i], 0.0);
                }
                self.fft.process_with_scratch(&mut buf, &mut scratch);
                per_window.push(buf[..=window / 2].iter().map(|z| z.norm_sqr()).collect());
            }
            out.push(per_window);
        }
        Ok(out)
    }

    pub fn band_power(&self, trial: &Trial, band: &WaveBand) -> Result<BandPowerSeries> {
        Ok(self.band_powers(trial, std::slice::from_ref(band))?.remove(0))
    }

    /// Band power for several bands, sharing one pass of FFTs.
    pub fn band_powers(&self, trial: &Trial, bands: &[WaveBand]) -> Result<Vec<BandPowerSeries>> {
        let bins: Vec<Vec<usize>> = bands
            .iter()
            .map(|b| band_bins(b, trial.fs, self.config.window))
            .collect::<Result<_>>()?;
        let spectra = self.spectra(trial)?;
        let n_windows = spectra.first().map_or(0, |s| s.len());
        Ok(bands
            .iter()
            .zip(&bins)
            .map(|(band, bins)| {
                let power = DMatrix::from_fn(trial.channels(), n_windows, |c, w| {
                    let spectrum = &spectra[c][w];
                    bins.iter().map(|&k| spectrum[k]).sum::<f64>() / bins.len() as f64
                });
                BandPowerSeries { band: band.name, power }
            })
            .collect())
    }
}

/// Band power with the default 50-point window and 5-sample step.
pub fn band_power(trial: &Trial, band: &WaveBand) -> Result<BandPowerSeries> {
    BandPowerExtractor::new(DspConfig::default())?.band_power(trial, band)
}
