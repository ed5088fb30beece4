//! Datasets on disk, the synthetic motor-imagery generator, and model
//! bundles.
//!
//! A dataset is a directory holding `manifest.json` and one CSV per trial
//! (rows are samples, columns are channels, first row is the channel names).

mod bundle;
mod synth;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsp::Trial;

pub use bundle::{load_bundle, load_bundle_for, save_bundle, Bundle, BUNDLE_VERSION};
pub use synth::{add_band_power_drift, generate_synthetic, SynthSpec, CHANNELS};

pub const MANIFEST_FORMAT: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Error)]
pub enum DataError {
    #[error("missing file: {}", .0.display())]
    MissingFile(PathBuf),
    #[error("ragged data in {}: row {row} has {found} columns, expected {expected}", path.display())]
    Ragged {
        path: PathBuf,
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("unknown label `{label}` (classes: {classes:?})")]
    UnknownLabel { label: String, classes: Vec<String> },
    #[error("sampling rate must be positive, got {0}")]
    InvalidFs(f64),
    #[error("parse error in {} row {row}: {message}", path.display())]
    Parse {
        path: PathBuf,
        row: usize,
        message: String,
    },
    #[error("invalid manifest: {0}")]
    Manifest(String),
    #[error("channel mismatch: expected {expected} channels, found {found}")]
    ChannelMismatch { expected: usize, found: usize },
    #[error("unsupported bundle version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("corrupt bundle {}: {message}", path.display())]
    CorruptBundle { path: PathBuf, message: String },
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error("i/o error on {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

pub type Result<T> = std::result::Result<T, DataError>;

pub(crate) fn io_err(path: &Path) -> impl FnOnce(io::Error) -> DataError + '_ {
    move |source| {
        if source.kind() == io::ErrorKind::NotFound {
            DataError::MissingFile(path.to_path_buf())
        } else {
            DataError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    }
}

/// Labeled trials sharing one sampling rate and channel montage.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSet {
    pub name: String,
    pub fs: f64,
    pub channels: Vec<String>,
    pub classes: Vec<String>,
    pub trials: Vec<Trial>,
}

impl TrialSet {
    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.trials.iter().map(|t| t.label).collect()
    }

    /// Checks the montage, labels and sampling rate of every trial.
    pub fn validate(&self) -> Result<()> {
        if !(self.fs > 0.0) || !self.fs.is_finite() {
            return Err(DataError::InvalidFs(self.fs));
        }
        if self.classes.len() < 2 {
            return Err(DataError::Manifest(format!("need at least 2 classes, got {}", self.classes.len())));
        }
        for t in &self.trials {
            if t.channels() != self.channels.len() {
                return Err(DataError::ChannelMismatch {
                    expected: self.channels.len(),
                    found: t.channels(),
                });
            }
            if t.label >= self.classes.len() {
                return Err(DataError::UnknownLabel {
                    label: t.label.to_string(),
                    classes: self.classes.clone(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialEntry {
    pub file: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format: u32,
    pub name: String,
    pub fs: f64,
    pub channels: Vec<String>,
    pub classes: Vec<String>,
    pub trials: Vec<TrialEntry>,
}

fn manifest_path(path: &Path) -> PathBuf {
    if path.is_dir() {
        path.join(MANIFEST_FILE)
    } else {
        path.to_path_buf()
    }
}

/// Loads a dataset from its directory or its manifest path.
pub fn load_dataset(path: &Path) -> Result<TrialSet> {
    let manifest_file = manifest_path(path);
    let text = fs::read_to_string(&manifest_file).map_err(io_err(&manifest_file))?;
    let manifest: DatasetManifest =
        serde_json::from_str(&text).map_err(|e| DataError::Manifest(format!("{}: {e}", manifest_file.display())))?;
    if manifest.format != MANIFEST_FORMAT {
        return Err(DataError::Manifest(format!(
            "unsupported format {} (expected {MANIFEST_FORMAT})",
            manifest.format
        )));
    }
    if !(manifest.fs > 0.0) || !manifest.fs.is_finite() {
        return Err(DataError::InvalidFs(manifest.fs));
    }
    let root = manifest_file.parent().unwrap_or(Path::new("."));
    let mut trials = Vec::with_capacity(manifest.trials.len());
    for entry in &manifest.trials {
        let label = manifest
            .classes
            .iter()
            .position(|c| *c == entry.label)
            .ok_or_else(|| DataError::UnknownLabel {
                label: entry.label.clone(),
                classes: manifest.classes.clone(),
            })?;
        let samples = read_trial_csv(&root.join(&entry.file), manifest.channels.len())?;
        trials.push(Trial {
            samples,
            fs: manifest.fs,
            label,
        });
    }
    let set = TrialSet {
        name: manifest.name,
        fs: manifest.fs,
        channels: manifest.channels,
        classes: manifest.classes,
        trials,
    };
    set.validate()?;
    Ok(set)
}

/// Reads a samples × channels CSV with a header row into channels × time.
fn read_trial_csv(path: &Path, channels: usize) -> Result<DMatrix<f64>> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(file);
    let header_len = reader
        .headers()
        .map_err(|e| DataError::Parse {
            path: path.to_path_buf(),
            row: 0,
            message: e.to_string(),
        })?
        .len();
    if header_len != channels {
        return Err(DataError::Ragged {
            path: path.to_path_buf(),
            row: 0,
            expected: channels,
            found: header_len,
        });
    }
    let mut values = Vec::new();
    let mut rows = 0;
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| DataError::Parse {
            path: path.to_path_buf(),
            row,
            message: e.to_string(),
        })?;
        if record.len() != channels {
            return Err(DataError::Ragged {
                path: path.to_path_buf(),
                row,
                expected: channels,
                found: record.len(),
            });
        }
        for field in record.iter() {
            let v: f64 = field.trim().parse().map_err(|_| DataError::Parse {
                path: path.to_path_buf(),
                row,
                message: format!("`{field}` is not a number"),
            })?;
            values.push(v);
        }
        rows += 1;
    }
    // values are samples × channels in row-major order.
    Ok(DMatrix::from_row_slice(rows, channels, &values).transpose())
}

/// Writes `manifest.json` plus one CSV per trial into `dir`.
pub fn save_dataset(set: &TrialSet, dir: &Path) -> Result<()> {
    set.validate()?;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut entries = Vec::with_capacity(set.trials.len());
    for (i, trial) in set.trials.iter().enumerate() {
        let file = format!("trial_{i:04}.csv");
        let path = dir.join(&file);
        let mut writer = csv::Writer::from_path(&path).map_err(|e| DataError::Io {
            path: path.clone(),
            source: e.into(),
        })?;
        let csv_err = |e: csv::Error| DataError::Io {
            path: path.clone(),
            source: e.into(),
        };
        writer.write_record(&set.channels).map_err(csv_err)?;
        for t in 0..trial.len() {
            // `{}` on f64 prints the shortest string that round-trips exactly.
            writer
                .write_record(trial.samples.column(t).iter().map(|v| v.to_string()))
                .map_err(csv_err)?;
        }
        writer.flush().map_err(io_err(&path))?;
        entries.push(TrialEntry {
            file,
            label: set.classes[trial.label].clone(),
        });
    }
    let manifest = DatasetManifest {
        format: MANIFEST_FORMAT,
        name: set.name.clone(),
        fs: set.fs,
        channels: set.channels.clone(),
        classes: set.classes.clone(),
        trials: entries,
    };
    let path = dir.join(MANIFEST_FILE);
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, json + "\n").map_err(io_err(&path))
}
