//! Q-learning agent: value network, replay, exploration and training.

mod network;
mod persist;
mod policy;
mod replay;
mod train;

pub use network::{Dense, Gradients, QNetwork};
pub use persist::{load_model, save_model, ModelFile, MODEL_SCHEMA_VERSION};
pub use policy::{argmax_lowest, select_action, EpsilonSchedule};
pub use replay::{Experience, ReplayBuffer};
pub use train::{
    bellman_target, rollout_greedy, train, train_step, train_with_progress, AgentConfig, EpisodeRecord, TrainingLog,
};
