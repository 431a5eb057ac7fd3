//! Synthetic layered disparity scenes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::DisparityMap;
use crate::error::{Error, Result};

pub const SCENE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LayerShape {
    Rectangle,
    GaussianBlob,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneLayer {
    pub shape: LayerShape,
    pub disparity_px: f64,
    /// Share of the image covered by the layer's support, in (0, 1].
    pub area_fraction: f64,
}

/// Recipe for a synthetic scene: a background plane with layers painted
/// over it in order, then additive Gaussian noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub width: usize,
    pub height: usize,
    #[serde(default)]
    pub layers: Vec<SceneLayer>,
    pub background_disparity_px: f64,
    #[serde(default)]
    pub noise_sigma_px: f64,
    /// Per-scene uniform perturbation (+/- px) of the background and of
    /// every layer disparity, so one spec yields a varied scene set.
    #[serde(default)]
    pub disparity_jitter_px: f64,
}

fn schema_version() -> u32 {
    SCENE_SCHEMA_VERSION
}

impl Default for SceneSpec {
    /// Mixed crossed/uncrossed scene at the default viewing geometry
    /// (about 31 px per degree).
    fn default() -> Self {
        Self {
            schema_version: SCENE_SCHEMA_VERSION,
            width: 64,
            height: 48,
            layers: vec![
                SceneLayer {
                    shape: LayerShape::Rectangle,
                    disparity_px: 32.0,
                    area_fraction: 0.2,
                },
                SceneLayer {
                    shape: LayerShape::GaussianBlob,
                    disparity_px: 50.0,
                    area_fraction: 0.1,
                },
                SceneLayer {
                    shape: LayerShape::Rectangle,
                    disparity_px: -35.0,
                    area_fraction: 0.25,
                },
            ],
            background_disparity_px: -10.0,
            noise_sigma_px: 1.0,
            disparity_jitter_px: 20.0,
        }
    }
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCENE_SCHEMA_VERSION {
            return Err(Error::Spec(format!(
                "unsupported scene schema version {}",
                self.schema_version
            )));
        }
        if self.width < 8 || self.height < 8 {
            return Err(Error::Spec(format!(
                "scene must be at least 8x8, got {}x{}",
                self.width, self.height
            )));
        }
        for (i, l) in self.layers.iter().enumerate() {
            if !(l.area_fraction > 0.0 && l.area_fraction <= 1.0) {
                return Err(Error::Spec(format!(
                    "layer {i}: area fraction {} outside (0, 1]",
                    l.area_fraction
                )));
            }
            if !l.disparity_px.is_finite() {
                return Err(Error::Spec(format!("layer {i}: non-finite disparity")));
            }
        }
        let non_neg = |v: f64| v.is_finite() && v >= 0.0;
        if !self.background_disparity_px.is_finite()
            || !non_neg(self.noise_sigma_px)
            || !non_neg(self.disparity_jitter_px)
        {
            return Err(Error::Spec(
                "background, noise and jitter must be finite; noise and jitter non-negative".into(),
            ));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::Spec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("scene spec serializes")
    }
}

/// Renders `spec` deterministically from `seed`.
///
/// Random draws happen in a fixed order: jitter (background, then layers),
/// layer placement (in layer order), then per-pixel noise in raster order.
pub fn generate_scene(spec: &SceneSpec, seed: u64) -> Result<DisparityMap> {
    spec.validate()?;
    let (w, h) = (spec.width, spec.height);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let jitter = |rng: &mut ChaCha8Rng| {
        if spec.disparity_jitter_px > 0.0 {
            rng.random_range(-spec.disparity_jitter_px..=spec.disparity_jitter_px)
        } else {
            0.0
        }
    };
    let background = spec.background_disparity_px + jitter(&mut rng);
    let layer_disp: Vec<f64> = spec.layers.iter().map(|l| l.disparity_px + jitter(&mut rng)).collect();

    let mut values = vec![background; w * h];
    for (layer, &disp) in spec.layers.iter().zip(&layer_disp) {
        let n = ((layer.area_fraction * (w * h) as f64).round() as usize).clamp(1, w * h);
        match layer.shape {
            LayerShape::Rectangle => paint_rectangle(&mut values, w, h, n, disp, &mut rng),
            LayerShape::GaussianBlob => paint_blob(&mut values, w, h, n, disp, &mut rng),
        }
    }

    if spec.noise_sigma_px > 0.0 {
        let normal = Normal::new(0.0, spec.noise_sigma_px).map_err(|e| Error::Spec(e.to_string()))?;
        for v in &mut values {
            *v += normal.sample(&mut rng);
        }
    }
    DisparityMap::from_values(w, h, values)
}

/// Paints exactly `n` pixels: a near-square rectangle filled in raster
/// order, so the last row may be partial.
fn paint_rectangle(values: &mut [f64], w: usize, h: usize, n: usize, disp: f64, rng: &mut ChaCha8Rng) {
    let mut rw = ((w as f64 * (n as f64 / (w * h) as f64).sqrt()).round() as usize).clamp(1, w);
    if rw * h < n {
        rw = n.div_ceil(h);
    }
    let rh = n.div_ceil(rw).min(h);
    let x0 = rng.random_range(0..=w - rw);
    let y0 = rng.random_range(0..=h - rh);
    for k in 0..n {
        let (dx, dy) = (k % rw, k / rw);
        values[(y0 + dy) * w + x0 + dx] = disp;
    }
}

/// Disc of area ~`n` pixels with a Gaussian falloff (sigma = radius / 2)
/// from `disp` at the centre toward whatever lies underneath.
fn paint_blob(values: &mut [f64], w: usize, h: usize, n: usize, disp: f64, rng: &mut ChaCha8Rng) {
    let radius = (n as f64 / std::f64::consts::PI).sqrt().max(0.5);
    let sigma = radius / 2.0;
    let cx = rng.random_range(0.0..w as f64);
    let cy = rng.random_range(0.0..h as f64);
    for y in 0..h {
        for x in 0..w {
            let dx = x as f64 + 0.5 - cx;
            let dy = y as f64 + 0.5 - cy;
            let r2 = dx * dx + dy * dy;
            if r2 <= radius * radius {
                let g = (-r2 / (2.0 * sigma * sigma)).exp();
                let v = &mut values[y * w + x];
                *v += (disp - *v) * g;
            }
        }
    }
}
