//! Visual-comfort-aware depth adjustment for stereoscopic 3D content.
//!
//! A disparity map is edited by emulating changes of the stereo camera
//! baseline. An objective comfort metric over perceptually weighted
//! disparity features scores each candidate, and a Q-learning agent learns
//! the sequence of baseline moves that makes the content comfortable
//! without flattening it. Exact oracles (grid search and finite-horizon
//! value iteration) validate the learned agent.
//!
//! Modules, bottom-up:
//! - [`disparity`]: disparity maps, file formats, synthetic scenes, view warping
//! - [`comfort`]: significance weighting, features, comfort score, calibration
//! - [`env`]: the adjustment MDP
//! - [`agent`]: Q-network, replay, exploration, training and greedy rollout
//! - [`oracle`]: grid search, value iteration and regret

pub mod agent;
pub mod comfort;
pub mod config;
pub mod disparity;
pub mod env;
pub mod error;
pub mod oracle;
pub mod stats;

pub use agent::{AgentConfig, QNetwork, TrainingLog};
pub use comfort::{ComfortModel, FeatureParams, FeatureVector};
pub use config::RunConfig;
pub use disparity::{DisparityMap, SceneSpec, ViewingGeometry};
pub use env::{Action, AdjustmentState, CameraState, EnvConfig, Transition};
pub use error::{Error, Result};
pub use oracle::OracleResult;
