//! Disparity fields and the transforms induced by camera movement.
//!
//! Sign convention everywhere: positive disparity is crossed (the point
//! appears in front of the screen), negative is uncrossed (behind it).

mod io;
mod synth;
mod warp;

pub use io::{load_disparity, save_csv, save_pfm, save_pgm16, DisparityFormat, Quantization};
pub use synth::{generate_scene, LayerShape, SceneLayer, SceneSpec, SCENE_SCHEMA_VERSION};
pub use warp::{warp_view, GrayImage};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{percentile_sorted, sorted_copy};

/// Dense per-pixel horizontal disparity (pixels) with a validity mask.
#[derive(Debug, Clone, PartialEq)]
pub struct DisparityMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
    valid: Vec<bool>,
}

impl DisparityMap {
    pub fn new(width: usize, height: usize, values: Vec<f64>, valid: Vec<bool>) -> Result<Self> {
        let n = width * height;
        if values.len() != n || valid.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: values.len().min(valid.len()),
            });
        }
        if !valid.iter().any(|&v| v) {
            return Err(Error::EmptyMap);
        }
        if values.iter().zip(&valid).any(|(d, &ok)| ok && !d.is_finite()) {
            return Err(Error::Domain("valid disparities must be finite".into()));
        }
        Ok(Self {
            width,
            height,
            values,
            valid,
        })
    }

    /// Map with every pixel valid.
    pub fn from_values(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        let valid = vec![true; values.len()];
        Self::new(width, height, values, valid)
    }

    pub fn constant(width: usize, height: usize, disparity: f64) -> Result<Self> {
        Self::from_values(width, height, vec![disparity; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn valid(&self) -> &[bool] {
        &self.valid
    }

    pub fn get(&self, x: usize, y: usize) -> Option<f64> {
        let i = y * self.width + x;
        self.valid[i].then(|| self.values[i])
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    /// Iterator over the disparities of valid pixels, in raster order.
    pub fn valid_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.values
            .iter()
            .zip(&self.valid)
            .filter_map(|(&d, &ok)| ok.then_some(d))
    }

    /// Disparity field after scaling the camera baseline by `ratio`.
    ///
    /// Under a parallel rig with a fixed convergence plane, disparity is
    /// proportional to the baseline, so every valid value is multiplied by
    /// `ratio`. Invalid pixels are left untouched.
    pub fn scale_disparity(&self, ratio: f64) -> Result<Self> {
        if !(ratio.is_finite() && ratio > 0.0) {
            return Err(Error::Domain(format!(
                "baseline ratio must be positive and finite, got {ratio}"
            )));
        }
        let values = self
            .values
            .iter()
            .zip(&self.valid)
            .map(|(&d, &ok)| if ok { d * ratio } else { d })
            .collect();
        Ok(Self {
            width: self.width,
            height: self.height,
            values,
            valid: self.valid.clone(),
        })
    }

    /// Angular disparity in degrees of visual angle.
    pub fn to_angular(&self, geom: &ViewingGeometry) -> AngularField {
        let degrees = self
            .values
            .iter()
            .zip(&self.valid)
            .map(|(&d, &ok)| if ok { geom.angular_degrees(d) } else { 0.0 })
            .collect();
        AngularField {
            width: self.width,
            height: self.height,
            degrees,
            valid: self.valid.clone(),
        }
    }

    pub fn stats(&self) -> DisparityStats {
        let sorted = sorted_copy(self.valid_values());
        DisparityStats::from_sorted(&sorted)
    }
}

/// Display geometry needed to express pixel disparities as visual angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ViewingGeometry {
    pub viewing_distance_mm: f64,
    pub pixel_pitch_mm: f64,
}

impl Default for ViewingGeometry {
    fn default() -> Self {
        Self {
            viewing_distance_mm: 900.0,
            pixel_pitch_mm: 0.5,
        }
    }
}

impl ViewingGeometry {
    pub fn new(viewing_distance_mm: f64, pixel_pitch_mm: f64) -> Result<Self> {
        let g = Self {
            viewing_distance_mm,
            pixel_pitch_mm,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if ok(self.viewing_distance_mm) && ok(self.pixel_pitch_mm) {
            Ok(())
        } else {
            Err(Error::Domain(format!("invalid viewing geometry {self:?}")))
        }
    }

    /// `(180/pi) * atan(d * pitch / distance)`.
    pub fn angular_degrees(&self, disparity_px: f64) -> f64 {
        (disparity_px * self.pixel_pitch_mm / self.viewing_distance_mm)
            .atan()
            .to_degrees()
    }

    /// Inverse of [`angular_degrees`](Self::angular_degrees).
    pub fn pixels_for_degrees(&self, degrees: f64) -> f64 {
        degrees.to_radians().tan() * self.viewing_distance_mm / self.pixel_pitch_mm
    }
}

/// Angular disparity field (degrees) sharing the mask of its source map.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularField {
    pub width: usize,
    pub height: usize,
    pub degrees: Vec<f64>,
    pub valid: Vec<bool>,
}

impl AngularField {
    pub fn valid_degrees(&self) -> impl Iterator<Item = f64> + '_ {
        self.degrees
            .iter()
            .zip(&self.valid)
            .filter_map(|(&d, &ok)| ok.then_some(d))
    }
}

/// Summary statistics over the valid pixels of a disparity map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisparityStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub p5: f64,
    pub p50: f64,
    pub p95: f64,
    pub range_p: f64,
}

impl DisparityStats {
    fn from_sorted(sorted: &[f64]) -> Self {
        let p5 = percentile_sorted(sorted, 0.05);
        let p95 = percentile_sorted(sorted, 0.95);
        Self {
            min: sorted[0],
            max: sorted[sorted.len() - 1],
            mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
            p5,
            p50: percentile_sorted(sorted, 0.5),
            p95,
            range_p: p95 - p5,
        }
    }
}
