//! Fitted pipeline persistence as versioned JSON.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{io_err, DataError, Result};
use crate::pipeline::PipelineModel;

pub const BUNDLE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bundle {
    pub version: u32,
    pub fs: f64,
    pub channels: Vec<String>,
    pub classes: Vec<String>,
    pub model: PipelineModel,
}

impl Bundle {
    pub fn new(model: PipelineModel, fs: f64, channels: Vec<String>, classes: Vec<String>) -> Self {
        Self {
            version: BUNDLE_VERSION,
            fs,
            channels,
            classes,
            model,
        }
    }

    /// Fails unless the bundle was fitted on `channels` channels.
    pub fn ensure_channels(&self, channels: usize) -> Result<()> {
        if self.channels.len() != channels {
            return Err(DataError::ChannelMismatch {
                expected: self.channels.len(),
                found: channels,
            });
        }
        Ok(())
    }
}

pub fn save_bundle(bundle: &Bundle, path: &Path) -> Result<()> {
    let json = serde_json::to_string(bundle).expect("bundle serializes");
    fs::write(path, json).map_err(io_err(path))
}

pub fn load_bundle(path: &Path) -> Result<Bundle> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let corrupt = |message: String| DataError::CorruptBundle {
        path: path.to_path_buf(),
        message,
    };
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| corrupt(e.to_string()))?;
    let version = value
        .get("version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| corrupt("missing version".into()))?;
    if version != u64::from(BUNDLE_VERSION) {
        return Err(DataError::Version {
            found: u32::try_from(version).unwrap_or(u32::MAX),
            expected: BUNDLE_VERSION,
        });
    }
    let bundle: Bundle = serde_json::from_value(value).map_err(|e| corrupt(e.to_string()))?;
    if bundle.model.channels() != bundle.channels.len() {
        return Err(corrupt(format!(
            "filters expect {} channels but the montage lists {}",
            bundle.model.channels(),
            bundle.channels.len()
        )));
    }
    Ok(bundle)
}

/// Loads a bundle and checks it against a montage of `channels` channels.
pub fn load_bundle_for(path: &Path, channels: usize) -> Result<Bundle> {
    let bundle = load_bundle(path)?;
    bundle.ensure_channels(channels)?;
    Ok(bundle)
}
