use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::network::{Gradients, QNetwork};
use super::policy::{argmax_lowest, select_action, EpsilonSchedule};
use super::replay::{Experience, ReplayBuffer};
use crate::disparity::DisparityMap;
use crate::env::{self, Action, EnvConfig, Transition};
use crate::error::{Error, Result};

/// DQN hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    /// Discount factor in [0, 1).
    pub gamma: f64,
    pub lr: f64,
    pub batch: usize,
    pub eps_start: f64,
    pub eps_end: f64,
    pub eps_decay_steps: usize,
    /// Gradient updates between target-network copies.
    pub target_sync: usize,
    pub buffer_capacity: usize,
    pub episodes: usize,
    pub seed: u64,
    /// Hidden layer widths.
    pub hidden: Vec<usize>,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            gamma: 0.9,
            lr: 1e-3,
            batch: 32,
            eps_start: 1.0,
            eps_end: 0.05,
            eps_decay_steps: 5000,
            target_sync: 200,
            buffer_capacity: 10_000,
            episodes: 2000,
            seed: 0,
            hidden: vec![64, 64],
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if !(0.0..1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1)");
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return bad("lr must be > 0");
        }
        if self.batch < 1 || self.target_sync < 1 || self.eps_decay_steps < 1 || self.buffer_capacity < 1 {
            return bad("batch, target_sync, eps_decay_steps and buffer_capacity must be >= 1");
        }
        let unit = 0.0..=1.0;
        if !unit.contains(&self.eps_start) || !unit.contains(&self.eps_end) || self.eps_end > self.eps_start {
            return bad("epsilon schedule needs 0 <= eps_end <= eps_start <= 1");
        }
        if self.hidden.contains(&0) {
            return bad("hidden layer widths must be positive");
        }
        Ok(())
    }

    pub fn schedule(&self) -> EpsilonSchedule {
        EpsilonSchedule {
            start: self.eps_start,
            end: self.eps_end,
            decay_steps: self.eps_decay_steps,
        }
    }

    /// `[n_in, hidden..., 3]`.
    pub fn layer_sizes(&self, n_in: usize) -> Vec<usize> {
        let mut s = vec![n_in];
        s.extend(&self.hidden);
        s.push(Action::COUNT);
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode: usize,
    #[serde(rename = "return")]
    pub ret: f64,
    pub final_vc: f64,
    pub final_ratio: f64,
    pub steps: usize,
    /// Exploration rate at the episode's first step.
    pub epsilon: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingLog {
    pub episodes: Vec<EpisodeRecord>,
    /// `(update index, pre-update batch loss)`.
    pub losses: Vec<(usize, f64)>,
}

impl TrainingLog {
    pub fn episodes_csv(&self) -> String {
        let mut out = String::from("episode,return,final_vc,final_ratio,steps,epsilon\n");
        for r in &self.episodes {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.episode, r.ret, r.final_vc, r.final_ratio, r.steps, r.epsilon
            )
            .unwrap();
        }
        out
    }

    pub fn losses_csv(&self) -> String {
        let mut out = String::from("update,loss\n");
        for (i, l) in &self.losses {
            writeln!(out, "{i},{l}").unwrap();
        }
        out
    }

    pub fn write_csvs(&self, episodes_path: &Path, losses_path: &Path) -> Result<()> {
        fs::write(episodes_path, self.episodes_csv()).map_err(|e| Error::io(episodes_path, e))?;
        fs::write(losses_path, self.losses_csv()).map_err(|e| Error::io(losses_path, e))
    }
}

/// `reward` on terminal transitions (or when `gamma == 0`), otherwise
/// `reward + gamma * max_a Q_target(next)[a]`.
pub fn bellman_target(target_net: &QNetwork, exp: &Experience, gamma: f64) -> Result<f64> {
    if exp.done || gamma == 0.0 {
        return Ok(exp.reward);
    }
    let q = target_net.forward(&exp.next_state)?;
    Ok(exp.reward + gamma * q.iter().copied().fold(f64::NEG_INFINITY, f64::max))
}

/// One gradient-descent step on the batch mean squared Bellman error.
/// Returns the loss measured before the update.
pub fn train_step(
    net: &mut QNetwork,
    target_net: &QNetwork,
    batch: &[&Experience],
    gamma: f64,
    lr: f64,
) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut total: Option<Gradients> = None;
    let mut loss = 0.0;
    for exp in batch {
        let y = bellman_target(target_net, exp, gamma)?;
        let q = net.forward(&exp.state)?;
        let err = q[exp.action] - y;
        loss += err * err;
        let g = net.backward(&exp.state, exp.action, y)?;
        match &mut total {
            Some(t) => t.add_assign(&g),
            None => total = Some(g),
        }
    }
    let n = batch.len() as f64;
    let mut grads = total.expect("non-empty batch");
    grads.scale(1.0 / n);
    net.apply_gradients(&grads, lr);
    Ok(loss / n)
}

pub fn train(
    scenes: &[DisparityMap],
    env_config: &EnvConfig,
    agent_config: &AgentConfig,
) -> Result<(QNetwork, TrainingLog)> {
    train_with_progress(scenes, env_config, agent_config, |_| {})
}

/// Training loop. Episodes cycle through `scenes` round-robin. Each step:
/// epsilon-greedy action, environment step, replay push, one update once
/// the buffer holds a full batch, and a target copy every `target_sync`
/// updates. All randomness comes from one generator seeded with
/// `agent_config.seed`, used for initialization, exploration and sampling.
pub fn train_with_progress(
    scenes: &[DisparityMap],
    env_config: &EnvConfig,
    agent_config: &AgentConfig,
    mut on_episode: impl FnMut(&EpisodeRecord),
) -> Result<(QNetwork, TrainingLog)> {
    if scenes.is_empty() {
        return Err(Error::Domain("training needs at least one scene".into()));
    }
    env_config.validate()?;
    agent_config.validate()?;

    let mut rng = ChaCha8Rng::seed_from_u64(agent_config.seed);
    let mut net = QNetwork::new(&agent_config.layer_sizes(env_config.encoded_len()), &mut rng)?;
    let mut target = net.clone();
    let mut buffer = ReplayBuffer::new(agent_config.buffer_capacity);
    let schedule = agent_config.schedule();
    let mut log = TrainingLog::default();
    let mut global_step = 0usize;
    let mut updates = 0usize;

    for episode in 0..agent_config.episodes {
        let scene = &scenes[episode % scenes.len()];
        let mut state = env::reset(scene, env_config)?;
        let epsilon0 = schedule.value(global_step);
        let mut ret = 0.0;
        let mut steps = 0;
        loop {
            let eps = schedule.value(global_step);
            let a = select_action(&net, &state.encoded, eps, &mut rng)?;
            let tr = env::step(scene, &state, Action::from_index(a).expect("valid index"), env_config)?;
            ret += tr.reward;
            steps += 1;
            global_step += 1;
            buffer.push(Experience::from(&tr));

            if buffer.len() >= agent_config.batch {
                let batch = buffer.sample(agent_config.batch, &mut rng);
                let loss = train_step(&mut net, &target, &batch, agent_config.gamma, agent_config.lr)?;
                log.losses.push((updates, loss));
                updates += 1;
                if updates.is_multiple_of(agent_config.target_sync) {
                    target = net.clone();
                }
            }

            let done = tr.done;
            state = tr.next_state;
            if done {
                break;
            }
        }
        let record = EpisodeRecord {
            episode,
            ret,
            final_vc: state.score.vc,
            final_ratio: state.camera.ratio,
            steps,
            epsilon: epsilon0,
        };
        on_episode(&record);
        log.episodes.push(record);
    }
    Ok((net, log))
}

/// Runs the greedy policy until the episode ends. Returns the transitions
/// and the scene scaled by the final ratio.
pub fn rollout_greedy(
    net: &QNetwork,
    scene: &DisparityMap,
    env_config: &EnvConfig,
) -> Result<(Vec<Transition>, DisparityMap)> {
    if net.input_len() != env_config.encoded_len() || net.output_len() != Action::COUNT {
        return Err(Error::LengthMismatch {
            expected: env_config.encoded_len(),
            got: net.input_len(),
        });
    }
    let mut state = env::reset(scene, env_config)?;
    let mut trajectory = Vec::new();
    loop {
        let a = argmax_lowest(&net.forward(&state.encoded)?);
        let tr = env::step(scene, &state, Action::from_index(a).expect("valid index"), env_config)?;
        state = tr.next_state.clone();
        let done = tr.done;
        trajectory.push(tr);
        if done {
            break;
        }
    }
    let adjusted = scene.scale_disparity(state.camera.ratio)?;
    Ok((trajectory, adjusted))
}
