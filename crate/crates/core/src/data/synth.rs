//! Synthetic motor-imagery EEG.
//!
//! Each channel is unit-variance 1/f noise (white Gaussian spectrum shaped
//! by `1/sqrt(f)` and inverted with an FFT, plus a shared component) with
//! 10 Hz mu and 20 Hz beta rhythms under a slow amplitude envelope. The
//! rhythms carry `snr` times the noise power. Imagining one hand
//! desynchronizes the rhythms over the opposite hemisphere, scaling their
//! amplitude by `1 - erd_depth`.
//!
//! Every trial draws from its own ChaCha8 stream keyed by `(seed, index)`,
//! so output is identical across runs, platforms and thread counts.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{DataError, Result, TrialSet};
use crate::dsp::Trial;
use crate::pipeline::TrialPowers;
use crate::util::derive_seed;

pub const CHANNELS: [&str; 4] = ["C3", "C4", "CP3", "CP4"];
const CLASS_NAMES: [&str; 4] = ["left", "right", "feet", "tongue"];

const MU_HZ: f64 = 10.0;
const BETA_HZ: f64 = 20.0;
/// Share of oscillatory power carried by mu; beta carries the rest.
const MU_SHARE: f64 = 2.0 / 3.0;
const ENVELOPE_DEPTH: f64 = 0.5;
const ENVELOPE_HZ: f64 = 0.25;
/// Log-normal spread of per-trial rhythm amplitudes.
const AMPLITUDE_JITTER: f64 = 0.25;
/// Weight of the noise component shared by all channels.
const COMMON_NOISE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub trials_per_class: usize,
    /// 2 (left/right hand) or 4 (adds feet and tongue).
    pub n_classes: usize,
    pub fs: f64,
    pub duration_s: f64,
    /// Oscillation-to-noise power ratio.
    pub snr: f64,
    pub erd_depth: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            trials_per_class: 100,
            n_classes: 2,
            fs: 100.0,
            duration_s: 4.0,
            snr: 4.0,
            erd_depth: 0.8,
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(DataError::InvalidSpec(m));
        if self.trials_per_class < 4 {
            return bad(format!("need at least 4 trials per class, got {}", self.trials_per_class));
        }
        if self.n_classes != 2 && self.n_classes != 4 {
            return bad(format!("n_classes must be 2 or 4, got {}", self.n_classes));
        }
        if !(self.fs > 60.0) || !self.fs.is_finite() {
            return bad(format!("fs must exceed 60 Hz, got {}", self.fs));
        }
        if !(self.duration_s > 0.0) || self.samples() < 2 {
            return bad(format!("duration too short: {} s", self.duration_s));
        }
        if !(self.snr > 0.0) || !self.snr.is_finite() {
            return bad(format!("snr must be positive, got {}", self.snr));
        }
        if !(0.0..=1.0).contains(&self.erd_depth) {
            return bad(format!("erd_depth must lie in [0, 1], got {}", self.erd_depth));
        }
        Ok(())
    }

    pub fn samples(&self) -> usize {
        (self.fs * self.duration_s).round() as usize
    }
}

/// Per-channel ERD factors `(mu, beta)` for a class.
fn erd_gains(label: usize, depth: f64) -> [(f64, f64); 4] {
    let keep = 1.0 - depth;
    let half = 1.0 - depth / 2.0;
    match label {
        // Left hand: right hemisphere (C4, CP4).
        0 => [(1.0, 1.0), (keep, keep), (1.0, 1.0), (keep, keep)],
        // Right hand: left hemisphere (C3, CP3).
        1 => [(keep, keep), (1.0, 1.0), (keep, keep), (1.0, 1.0)],
        // Feet: a weaker bilateral mu ERD.
        2 => [(half, 1.0); 4],
        // Tongue: beta-only ERD.
        _ => [(1.0, keep); 4],
    }
}

/// Unit-variance noise with a `1/f` power spectrum.
fn pink_noise(rng: &mut ChaCha8Rng, planner: &mut FftPlanner<f64>, n: usize, fs: f64) -> Vec<f64> {
    let mut spec = vec![Complex::new(0.0, 0.0); n];
    for k in 1..=n / 2 {
        let f = k as f64 * fs / n as f64;
        let amp = 1.0 / f.sqrt();
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        spec[k] = Complex::new(re, im) * amp;
        if k != n - k {
            spec[n - k] = spec[k].conj();
        } else {
            spec[k].im = 0.0;
        }
    }
    planner.plan_fft_inverse(n).process(&mut spec);
    let mut out: Vec<f64> = spec.iter().map(|c| c.re).collect();
    let mean = out.iter().sum::<f64>() / n as f64;
    let sd = (out.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
    for v in &mut out {
        *v = (*v - mean) / sd;
    }
    out
}

fn generate_trial(spec: &SynthSpec, index: usize, label: usize, planner: &mut FftPlanner<f64>) -> Trial {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, &[index as u64]));
    let n = spec.samples();
    let common = pink_noise(&mut rng, planner, n, spec.fs);
    let norm = 1.0 / (1.0 + COMMON_NOISE * COMMON_NOISE).sqrt();
    // Rhythm power A²/2 · E[env²] must equal snr times the unit noise power.
    let env_power = 1.0 + ENVELOPE_DEPTH * ENVELOPE_DEPTH / 2.0;
    let amp = |share: f64| (2.0 * spec.snr * share / env_power).sqrt();
    let (a_mu, a_beta) = (amp(MU_SHARE), amp(1.0 - MU_SHARE));
    let gains = erd_gains(label, spec.erd_depth);
    let env_phase = rng.random::<f64>() * 2.0 * PI;
    let mut samples = DMatrix::zeros(CHANNELS.len(), n);
    for (c, &(g_mu, g_beta)) in gains.iter().enumerate() {
        let own = pink_noise(&mut rng, planner, n, spec.fs);
        let j_mu = (AMPLITUDE_JITTER * rng.sample::<f64, _>(StandardNormal)).exp();
        let j_beta = (AMPLITUDE_JITTER * rng.sample::<f64, _>(StandardNormal)).exp();
        let ph_mu = rng.random::<f64>() * 2.0 * PI;
        let ph_beta = rng.random::<f64>() * 2.0 * PI;
        for t in 0..n {
            let time = t as f64 / spec.fs;
            let env = 1.0 + ENVELOPE_DEPTH * (2.0 * PI * ENVELOPE_HZ * time + env_phase).sin();
            let mu = a_mu * g_mu * j_mu * (2.0 * PI * MU_HZ * time + ph_mu).sin();
            let beta = a_beta * g_beta * j_beta * (2.0 * PI * BETA_HZ * time + ph_beta).sin();
            samples[(c, t)] = norm * (own[t] + COMMON_NOISE * common[t]) + env * (mu + beta);
        }
    }
    Trial {
        samples,
        fs: spec.fs,
        label,
    }
}

/// Generates `trials_per_class * n_classes` trials with labels cycling
/// through the classes.
pub fn generate_synthetic(spec: &SynthSpec) -> Result<TrialSet> {
    spec.validate()?;
    let mut planner = FftPlanner::new();
    let total = spec.trials_per_class * spec.n_classes;
    let trials = (0..total)
        .map(|i| generate_trial(spec, i, i % spec.n_classes, &mut planner))
        .collect();
    Ok(TrialSet {
        name: format!("synthetic-seed{}", spec.seed),
        fs: spec.fs,
        channels: CHANNELS.iter().map(|s| s.to_string()).collect(),
        classes: CLASS_NAMES[..spec.n_classes].iter().map(|s| s.to_string()).collect(),
        trials,
    })
}

/// Adds a nonnegative linear trend to every band-power channel series:
/// `power[c][t] += magnitude · u · ref_band · t / (windows - 1)`, where
/// `ref_band` is the band's mean power over the whole set and
/// `u ~ U(0, 1)` is drawn per trial, band and channel. The trend is thus
/// independent of the class, like slow electrode drift.
pub fn add_band_power_drift(powers: &mut [TrialPowers], magnitude: f64, seed: u64) {
    let n_bands = powers.first().map_or(0, |p| p.bands.len());
    let reference: Vec<f64> = (0..n_bands)
        .map(|b| powers.iter().map(|p| p.bands[b].power.mean()).sum::<f64>() / powers.len() as f64)
        .collect();
    for (i, trial) in powers.iter_mut().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[i as u64]));
        for (series, &r) in trial.bands.iter_mut().zip(&reference) {
            let w = series.power.ncols();
            if w < 2 {
                continue;
            }
            for mut row in series.power.row_iter_mut() {
                let slope = magnitude * rng.random::<f64>() * r / (w - 1) as f64;
                for (t, v) in row.iter_mut().enumerate() {
                    *v += slope * t as f64;
                }
            }
        }
    }
}
