use serde::{Deserialize, Serialize};

use super::significance::{significance_from_angular, SignificanceMap};
use crate::disparity::{AngularField, DisparityMap, ViewingGeometry};
use crate::error::{Error, Result};
use crate::stats::{percentile_sorted, sorted_copy};

/// Number of scalar features preceding the histogram.
pub const BASE_FEATURES: usize = 5;

/// Parameters of the feature extractor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureParams {
    /// Comfort zone half-width, degrees.
    pub zc: f64,
    /// Histogram bin count.
    pub bins: usize,
    /// Histogram half-range, degrees; values beyond are clamped into the end bins.
    pub hmax: f64,
    /// Significance exponent.
    pub gamma: f64,
    /// Uniform mass blended into the significance map.
    pub floor: f64,
}

impl Default for FeatureParams {
    fn default() -> Self {
        Self {
            zc: 1.0,
            bins: 16,
            hmax: 2.0,
            gamma: 1.0,
            floor: 0.1,
        }
    }
}

impl FeatureParams {
    pub fn len(&self) -> usize {
        BASE_FEATURES + self.bins
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !pos(self.zc) || !pos(self.hmax) || self.bins < 2 {
            return Err(Error::Config(format!(
                "feature params need zc > 0, hmax > 0, bins >= 2: {self:?}"
            )));
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) || !(0.0..1.0).contains(&self.floor) {
            return Err(Error::Config(format!(
                "feature params need gamma >= 0 and floor in [0, 1): {self:?}"
            )));
        }
        Ok(())
    }

    /// Canonical text form used for fingerprints.
    pub fn canonical(&self) -> String {
        format!(
            "zc={:?};bins={};hmax={:?};gamma={:?};floor={:?}",
            self.zc, self.bins, self.hmax, self.gamma, self.floor
        )
    }
}

/// Fixed-length perceptual summary of a disparity map.
///
/// Layout: `[mean |eta| (weighted), p95 |eta|, crossed violation mass,
/// uncrossed violation mass, p95 - p5 of eta, histogram...]`; angles in
/// degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weighted_mean_abs(&self) -> f64 {
        self.0[0]
    }

    pub fn p95_abs(&self) -> f64 {
        self.0[1]
    }

    pub fn crossed_violation(&self) -> f64 {
        self.0[2]
    }

    pub fn uncrossed_violation(&self) -> f64 {
        self.0[3]
    }

    pub fn depth_range(&self) -> f64 {
        self.0[4]
    }

    pub fn histogram(&self) -> &[f64] {
        &self.0[BASE_FEATURES..]
    }

    /// Column names matching the layout, e.g. for CSV headers.
    pub fn column_names(bins: usize) -> Vec<String> {
        let mut names: Vec<String> = ["mean_abs", "p95_abs", "crossed", "uncrossed", "depth_range"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        names.extend((0..bins).map(|k| format!("hist{k}")));
        names
    }
}

pub fn extract_features(
    map: &DisparityMap,
    sig: &SignificanceMap,
    geom: &ViewingGeometry,
    params: &FeatureParams,
) -> Result<FeatureVector> {
    let n = map.width() * map.height();
    if sig.len() != n {
        return Err(Error::ShapeMismatch {
            expected: map.dims(),
            got: (sig.len(), 1),
        });
    }
    features_from_angular(&map.to_angular(geom), sig, params)
}

pub fn features_from_angular(
    field: &AngularField,
    sig: &SignificanceMap,
    params: &FeatureParams,
) -> Result<FeatureVector> {
    params.validate()?;
    if sig.len() != field.degrees.len() {
        return Err(Error::ShapeMismatch {
            expected: (field.width, field.height),
            got: (sig.len(), 1),
        });
    }
    let k = params.bins;
    let bin_width = 2.0 * params.hmax / k as f64;

    let mut mean_abs = 0.0;
    let mut crossed = 0.0;
    let mut uncrossed = 0.0;
    let mut hist = vec![0.0; k];
    let mut mass = 0.0;
    for ((&eta, &ok), &w) in field.degrees.iter().zip(&field.valid).zip(sig.weights()) {
        if !ok {
            continue;
        }
        mass += w;
        mean_abs += w * eta.abs();
        if eta > params.zc {
            crossed += w;
        } else if eta < -params.zc {
            uncrossed += w;
        }
        let bin = ((eta + params.hmax) / bin_width).floor().clamp(0.0, (k - 1) as f64) as usize;
        hist[bin] += w;
    }
    if mass <= 0.0 {
        return Err(Error::EmptyMap);
    }
    for h in &mut hist {
        *h /= mass;
    }

    let signed = sorted_copy(field.valid_degrees());
    let abs = sorted_copy(field.valid_degrees().map(f64::abs));
    let p95_abs = percentile_sorted(&abs, 0.95);
    let range = percentile_sorted(&signed, 0.95) - percentile_sorted(&signed, 0.05);

    let mut values = Vec::with_capacity(params.len());
    values.extend([mean_abs / mass, p95_abs, crossed / mass, uncrossed / mass, range]);
    values.extend(hist);
    Ok(FeatureVector(values))
}

/// Geometry plus feature parameters: the full map-to-features pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureExtractor {
    pub geometry: ViewingGeometry,
    pub params: FeatureParams,
}

impl FeatureExtractor {
    pub fn new(geometry: ViewingGeometry, params: FeatureParams) -> Result<Self> {
        geometry.validate()?;
        params.validate()?;
        Ok(Self { geometry, params })
    }

    pub fn compute(&self, map: &DisparityMap) -> Result<FeatureVector> {
        let field = map.to_angular(&self.geometry);
        let sig = significance_from_angular(&field, self.params.gamma, self.params.floor)?;
        features_from_angular(&field, &sig, &self.params)
    }
}
