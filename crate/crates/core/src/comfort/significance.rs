use crate::disparity::{AngularField, DisparityMap, ViewingGeometry};
use crate::error::{Error, Result};

/// Per-pixel weights over valid pixels, summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct SignificanceMap {
    weights: Vec<f64>,
}

impl SignificanceMap {
    /// Per-pixel weights in raster order; zero on invalid pixels.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Magnitude salience: raw weight `|eta|^gamma` per valid pixel, normalized,
/// then blended with the uniform distribution by `floor`.
///
/// When the raw mass is zero (a flat scene with `gamma > 0`) the map falls
/// back to uniform.
pub fn significance_map(map: &DisparityMap, geom: &ViewingGeometry, gamma: f64, floor: f64) -> Result<SignificanceMap> {
    significance_from_angular(&map.to_angular(geom), gamma, floor)
}

pub fn significance_from_angular(field: &AngularField, gamma: f64, floor: f64) -> Result<SignificanceMap> {
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(Error::Domain(format!(
            "significance exponent must be >= 0, got {gamma}"
        )));
    }
    if !(0.0..1.0).contains(&floor) {
        return Err(Error::Domain(format!("uniform floor must lie in [0, 1), got {floor}")));
    }
    let n_valid = field.valid.iter().filter(|&&v| v).count();
    if n_valid == 0 {
        return Err(Error::EmptyMap);
    }
    let uniform = 1.0 / n_valid as f64;

    let raw: Vec<f64> = field
        .degrees
        .iter()
        .zip(&field.valid)
        .map(|(&eta, &ok)| if ok { eta.abs().powf(gamma) } else { 0.0 })
        .collect();
    let total: f64 = raw.iter().sum();

    let weights = if total > 0.0 && total.is_finite() {
        raw.iter()
            .zip(&field.valid)
            .map(|(&w, &ok)| {
                if ok {
                    (1.0 - floor) * (w / total) + floor * uniform
                } else {
                    0.0
                }
            })
            .collect()
    } else {
        field.valid.iter().map(|&ok| if ok { uniform } else { 0.0 }).collect()
    };
    Ok(SignificanceMap { weights })
}
