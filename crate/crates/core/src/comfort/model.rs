use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::features::{FeatureParams, FeatureVector, BASE_FEATURES};
use crate::error::{Error, Result};

pub const MOS_MIN: f64 = 1.0;
pub const MOS_MAX: f64 = 5.0;
pub const COMFORT_SCHEMA_VERSION: u32 = 1;

/// Linear predictor of visual comfort on the 1-5 MOS scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComfortModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl ComfortModel {
    pub fn new(weights: Vec<f64>, bias: f64) -> Self {
        Self { weights, bias }
    }

    /// Engineering defaults: a flat scene scores 5 and comfort-zone
    /// violations push the score toward 1. Histogram bins and the depth
    /// range carry no weight.
    pub fn default_for(params: &FeatureParams) -> Self {
        let mut weights = vec![0.0; params.len()];
        weights[..BASE_FEATURES].copy_from_slice(&[-1.2, -0.8, -2.0, -1.5, 0.0]);
        Self { weights, bias: 5.0 }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Unclamped linear response.
    pub fn raw_score(&self, features: &FeatureVector) -> Result<f64> {
        if features.len() != self.weights.len() {
            return Err(Error::LengthMismatch {
                expected: self.weights.len(),
                got: features.len(),
            });
        }
        Ok(self
            .weights
            .iter()
            .zip(features.as_slice())
            .map(|(w, x)| w * x)
            .sum::<f64>()
            + self.bias)
    }
}

/// `clamp(w . f + b, 1, 5)`.
pub fn comfort_score(features: &FeatureVector, model: &ComfortModel) -> Result<f64> {
    Ok(model.raw_score(features)?.clamp(MOS_MIN, MOS_MAX))
}

/// Retained depth: the p95 - p5 angular range in degrees.
pub fn depth_richness(features: &FeatureVector) -> f64 {
    features.depth_range()
}

/// On-disk form of a comfort model together with the feature parameters it
/// was fitted for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComfortModelFile {
    pub schema_version: u32,
    pub zc: f64,
    #[serde(rename = "K")]
    pub bins: usize,
    pub hmax: f64,
    pub gamma: f64,
    pub floor: f64,
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl ComfortModelFile {
    pub fn new(params: &FeatureParams, model: &ComfortModel) -> Self {
        Self {
            schema_version: COMFORT_SCHEMA_VERSION,
            zc: params.zc,
            bins: params.bins,
            hmax: params.hmax,
            gamma: params.gamma,
            floor: params.floor,
            weights: model.weights.clone(),
            bias: model.bias,
        }
    }

    pub fn split(self) -> Result<(FeatureParams, ComfortModel)> {
        if self.schema_version != COMFORT_SCHEMA_VERSION {
            return Err(Error::Format(format!(
                "unsupported comfort model schema version {}",
                self.schema_version
            )));
        }
        let params = FeatureParams {
            zc: self.zc,
            bins: self.bins,
            hmax: self.hmax,
            gamma: self.gamma,
            floor: self.floor,
        };
        params.validate()?;
        if self.weights.len() != params.len() {
            return Err(Error::LengthMismatch {
                expected: params.len(),
                got: self.weights.len(),
            });
        }
        Ok((params, ComfortModel::new(self.weights, self.bias)))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("comfort model serializes");
        fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    }
}
