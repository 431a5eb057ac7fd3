use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::comfort::{ComfortModel, FeatureExtractor, FeatureParams, MOS_MAX, MOS_MIN};
use crate::disparity::ViewingGeometry;
use crate::error::{Error, Result};

pub const ENV_SCHEMA_VERSION: u32 = 1;

/// Distance below which a ratio is snapped onto its grid point.
const SNAP_TOL: f64 = 1e-9;

/// Parameters of the adjustment MDP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    /// Additive baseline-ratio step.
    pub delta: f64,
    pub r_min: f64,
    pub r_max: f64,
    /// Episode horizon in steps.
    pub t_max: usize,
    /// Weight of the comfort change in the reward.
    pub alpha: f64,
    /// Weight of the depth-richness change in the reward.
    pub beta: f64,
    /// Terminal bonus magnitude on Stop.
    pub tau: f64,
    /// Comfort needed on Stop to earn `+tau` rather than `-tau`.
    pub vc_ok: f64,
    pub geometry: ViewingGeometry,
    pub features: FeatureParams,
    pub model: ComfortModel,
}

impl Default for EnvConfig {
    fn default() -> Self {
        let features = FeatureParams::default();
        Self {
            delta: 0.05,
            r_min: 0.2,
            r_max: 2.0,
            t_max: 20,
            alpha: 1.0,
            beta: 0.0,
            tau: 0.0,
            vc_ok: 3.5,
            geometry: ViewingGeometry::default(),
            model: ComfortModel::default_for(&features),
            features,
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return bad(format!("delta must be > 0, got {}", self.delta));
        }
        if !(self.r_min > 0.0 && self.r_min < 1.0 && self.r_max > 1.0 && self.r_max.is_finite()) {
            return bad(format!(
                "ratio bounds must satisfy 0 < r_min < 1 < r_max, got [{}, {}]",
                self.r_min, self.r_max
            ));
        }
        if self.t_max < 1 {
            return bad("t_max must be >= 1".into());
        }
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("tau", self.tau)] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be >= 0, got {v}"));
            }
        }
        if !(MOS_MIN..=MOS_MAX).contains(&self.vc_ok) {
            return bad(format!("vc_ok must lie in [1, 5], got {}", self.vc_ok));
        }
        self.geometry.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.features.validate()?;
        if self.model.len() != self.features.len() {
            return bad(format!(
                "comfort model has {} weights, features have {}",
                self.model.len(),
                self.features.len()
            ));
        }
        Ok(())
    }

    pub fn extractor(&self) -> Result<FeatureExtractor> {
        FeatureExtractor::new(self.geometry, self.features)
    }

    /// Snaps a ratio that drifted by floating-point error back onto the
    /// reachable grid (`1 + k delta`, `r_min + j delta`, `r_max - j delta`),
    /// then clamps it into the bounds.
    pub fn snap_ratio(&self, r: f64) -> f64 {
        let near = |c: f64| (r - c).abs() <= SNAP_TOL;
        let lattice = |origin: f64| origin + ((r - origin) / self.delta).round() * self.delta;
        let snapped = if near(self.r_min) {
            self.r_min
        } else if near(self.r_max) {
            self.r_max
        } else if near(lattice(1.0)) {
            lattice(1.0)
        } else if near(lattice(self.r_min)) {
            lattice(self.r_min)
        } else if near(lattice(self.r_max)) {
            lattice(self.r_max)
        } else {
            r
        };
        snapped.clamp(self.r_min, self.r_max)
    }

    /// Fingerprint of everything that shapes the encoded state: feature
    /// parameters, viewing geometry, ratio bounds and horizon.
    pub fn fingerprint(&self) -> String {
        let canonical = format!(
            "features[{}];geometry[{:?},{:?}];ratio[{:?},{:?}];t_max={}",
            self.features.canonical(),
            self.geometry.viewing_distance_mm,
            self.geometry.pixel_pitch_mm,
            self.r_min,
            self.r_max,
            self.t_max
        );
        hex::encode(&Sha256::digest(canonical.as_bytes())[..8])
    }
}
