//! Iterative depth adjustment as a deterministic Markov decision process.
//!
//! The state is the perceptual feature vector of the scene scaled by the
//! current baseline ratio, plus the ratio and step counter. Actions move the
//! virtual cameras closer together or further apart, or stop.

mod config;
mod trajectory;

pub use config::{EnvConfig, ENV_SCHEMA_VERSION};
pub use trajectory::{write_trajectory_csv, TRAJECTORY_HEADER};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::comfort::{comfort_score, depth_richness, FeatureVector};
use crate::disparity::DisparityMap;
use crate::error::{Error, Result};

/// Camera movement action. Indices are fixed: Closer=0, Farther=1, Stop=2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    /// Shrink the baseline by one step.
    Closer,
    /// Widen the baseline by one step.
    Farther,
    Stop,
}

impl Action {
    pub const ALL: [Action; 3] = [Action::Closer, Action::Farther, Action::Stop];
    pub const COUNT: usize = 3;

    pub fn index(self) -> usize {
        match self {
            Action::Closer => 0,
            Action::Farther => 1,
            Action::Stop => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Action::Closer => "closer",
            Action::Farther => "farther",
            Action::Stop => "stop",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Action {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Format(format!("unknown action `{s}`")))
    }
}

/// Baseline ratio relative to the original capture, and the step index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraState {
    pub ratio: f64,
    pub step: usize,
}

impl CameraState {
    pub fn initial() -> Self {
        Self { ratio: 1.0, step: 0 }
    }
}

/// Comfort score and depth richness of one scaled scene.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Score {
    pub vc: f64,
    pub depth: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdjustmentState {
    pub features: FeatureVector,
    pub camera: CameraState,
    pub score: Score,
    /// `features ++ [normalized ratio, step / t_max]`.
    pub encoded: Vec<f64>,
    pub terminal: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: AdjustmentState,
    pub action: Action,
    pub reward: f64,
    pub next_state: AdjustmentState,
    pub done: bool,
}

/// Next camera state. Moves clamp at the ratio bounds; every action,
/// including a clamped no-op, consumes one step.
pub fn apply_action(camera: CameraState, action: Action, config: &EnvConfig) -> CameraState {
    let ratio = match action {
        Action::Closer => config.snap_ratio((camera.ratio - config.delta).max(config.r_min)),
        Action::Farther => config.snap_ratio((camera.ratio + config.delta).min(config.r_max)),
        Action::Stop => camera.ratio,
    };
    CameraState {
        ratio,
        step: camera.step + 1,
    }
}

/// `alpha * dVC + beta * dD`, plus `+tau` / `-tau` on Stop depending on
/// whether the resulting comfort reaches `vc_ok`.
pub fn reward(prev: Score, next: Score, action: Action, config: &EnvConfig) -> f64 {
    let mut r = config.alpha * (next.vc - prev.vc) + config.beta * (next.depth - prev.depth);
    if action == Action::Stop {
        r += if next.vc >= config.vc_ok {
            config.tau
        } else {
            -config.tau
        };
    }
    r
}

fn build_state(scene: &DisparityMap, camera: CameraState, config: &EnvConfig) -> Result<AdjustmentState> {
    let (features, score) = config.evaluate(scene, camera.ratio)?;
    let encoded = config.encode(&features, camera);
    Ok(AdjustmentState {
        features,
        camera,
        score,
        encoded,
        terminal: false,
    })
}

/// Initial state: the unscaled scene at step 0.
pub fn reset(scene: &DisparityMap, config: &EnvConfig) -> Result<AdjustmentState> {
    build_state(scene, CameraState::initial(), config)
}

pub fn step(scene: &DisparityMap, state: &AdjustmentState, action: Action, config: &EnvConfig) -> Result<Transition> {
    if state.terminal {
        return Err(Error::TerminalState);
    }
    let camera = apply_action(state.camera, action, config);
    let no_op = action != Action::Stop && camera.ratio == state.camera.ratio;
    let done = action == Action::Stop || camera.step >= config.t_max || no_op;

    let mut next_state = if camera.ratio == state.camera.ratio {
        // same scaled scene; only the step counter moves
        AdjustmentState {
            encoded: config.encode(&state.features, camera),
            features: state.features.clone(),
            camera,
            score: state.score,
            terminal: false,
        }
    } else {
        build_state(scene, camera, config)?
    };
    next_state.terminal = done;
    Ok(Transition {
        state: state.clone(),
        action,
        reward: reward(state.score, next_state.score, action, config),
        next_state,
        done,
    })
}

impl EnvConfig {
    /// Features, comfort and depth of `scene` scaled by `ratio`.
    pub fn evaluate(&self, scene: &DisparityMap, ratio: f64) -> Result<(FeatureVector, Score)> {
        let scaled = scene.scale_disparity(ratio)?;
        let features = self.extractor()?.compute(&scaled)?;
        let vc = comfort_score(&features, &self.model)?;
        let depth = depth_richness(&features);
        Ok((features, Score { vc, depth }))
    }

    pub fn encode(&self, features: &FeatureVector, camera: CameraState) -> Vec<f64> {
        let mut v = Vec::with_capacity(features.len() + 2);
        v.extend_from_slice(features.as_slice());
        v.push((camera.ratio - self.r_min) / (self.r_max - self.r_min));
        v.push(camera.step as f64 / self.t_max as f64);
        v
    }

    pub fn encoded_len(&self) -> usize {
        self.features.len() + 2
    }
}
