use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::vi::value_iteration;
use crate::disparity::DisparityMap;
use crate::env::{apply_action, Action, CameraState, EnvConfig, Score};
use crate::error::Result;

/// The adjustment MDP collapsed onto its reachable ratios.
#[derive(Debug, Clone)]
pub struct RatioGridMDP {
    /// Reachable ratios from 1.0 within the horizon, ascending.
    pub ratios: Vec<f64>,
    /// Comfort and depth of the scene at each ratio.
    pub scores: Vec<Score>,
    /// `next[i][a]`: grid index after action `a` from ratio `i`.
    pub next: Vec<[usize; 3]>,
    pub identity: usize,
    pub config: EnvConfig,
}

impl RatioGridMDP {
    pub fn build(scene: &DisparityMap, config: &EnvConfig) -> Result<Self> {
        config.validate()?;
        // breadth-first over the deterministic ratio dynamics
        let mut seen: HashMap<u64, ()> = HashMap::new();
        let mut frontier = vec![1.0f64];
        seen.insert(1.0f64.to_bits(), ());
        for _ in 0..config.t_max {
            let mut next_frontier = Vec::new();
            for &r in &frontier {
                for a in [Action::Closer, Action::Farther] {
                    let nr = apply_action(CameraState { ratio: r, step: 0 }, a, config).ratio;
                    if seen.insert(nr.to_bits(), ()).is_none() {
                        next_frontier.push(nr);
                    }
                }
            }
            if next_frontier.is_empty() {
                break;
            }
            frontier = next_frontier;
        }
        let mut ratios: Vec<f64> = seen.keys().map(|&b| f64::from_bits(b)).collect();
        ratios.sort_by(f64::total_cmp);
        let index: HashMap<u64, usize> = ratios.iter().enumerate().map(|(i, r)| (r.to_bits(), i)).collect();

        let lookup = |r: f64| index.get(&r.to_bits()).copied();
        let next = ratios
            .iter()
            .enumerate()
            .map(|(i, &r)| {
                let mv = |a| {
                    let nr = apply_action(CameraState { ratio: r, step: 0 }, a, config).ratio;
                    // moves off the horizon's frontier are never taken in time
                    lookup(nr).unwrap_or(i)
                };
                [mv(Action::Closer), mv(Action::Farther), i]
            })
            .collect();
        let scores = ratios
            .iter()
            .map(|&r| config.evaluate(scene, r).map(|(_, s)| s))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            identity: index[&1.0f64.to_bits()],
            ratios,
            scores,
            next,
            config: config.clone(),
        })
    }

    pub fn len(&self) -> usize {
        self.ratios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ratios.is_empty()
    }

    pub fn horizon(&self) -> usize {
        self.config.t_max
    }

    /// Outcome of taking `action` from ratio index `i` at step `t`:
    /// `(next index, reward, done)`, mirroring the environment exactly.
    pub fn transition(&self, i: usize, t: usize, action: Action) -> (usize, f64, bool) {
        let j = self.next[i][action.index()];
        let reward = crate::env::reward(self.scores[i], self.scores[j], action, &self.config);
        let no_op = action != Action::Stop && j == i;
        let done = action == Action::Stop || t + 1 >= self.config.t_max || no_op;
        (j, reward, done)
    }

    pub fn index_of(&self, ratio: f64) -> Option<usize> {
        self.ratios.iter().position(|r| r.to_bits() == ratio.to_bits())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub best_ratio: f64,
    pub best_vc: f64,
    pub vc_at_identity: f64,
    /// Moves from ratio 1.0 to `best_ratio`, then Stop when the horizon allows.
    pub best_action_sequence: Vec<Action>,
    /// Optimal discounted return from the initial state, when computed.
    pub optimal_value: Option<f64>,
}

/// Best comfort over all reachable ratios. Ties prefer the ratio closest to
/// 1.0, then the smaller ratio.
pub fn grid_search(scene: &DisparityMap, config: &EnvConfig) -> Result<OracleResult> {
    let mdp = RatioGridMDP::build(scene, config)?;
    Ok(grid_search_mdp(&mdp))
}

pub(crate) fn grid_search_mdp(mdp: &RatioGridMDP) -> OracleResult {
    let mut best = mdp.identity;
    for i in 0..mdp.len() {
        let (vc, best_vc) = (mdp.scores[i].vc, mdp.scores[best].vc);
        let (dist, best_dist) = ((mdp.ratios[i] - 1.0).abs(), (mdp.ratios[best] - 1.0).abs());
        let better = vc > best_vc
            || (vc == best_vc && (dist < best_dist || (dist == best_dist && mdp.ratios[i] < mdp.ratios[best])));
        if better {
            best = i;
        }
    }
    let steps = best.abs_diff(mdp.identity);
    let mv = if best < mdp.identity {
        Action::Closer
    } else {
        Action::Farther
    };
    let mut seq = vec![mv; steps];
    if steps < mdp.horizon() {
        seq.push(Action::Stop);
    }
    OracleResult {
        best_ratio: mdp.ratios[best],
        best_vc: mdp.scores[best].vc,
        vc_at_identity: mdp.scores[mdp.identity].vc,
        best_action_sequence: seq,
        optimal_value: None,
    }
}

/// Grid search plus the optimal discounted value from value iteration.
pub fn solve(scene: &DisparityMap, config: &EnvConfig, gamma: f64) -> Result<OracleResult> {
    let mdp = RatioGridMDP::build(scene, config)?;
    let mut result = grid_search_mdp(&mdp);
    let table = value_iteration(&mdp, gamma);
    result.optimal_value = Some(table.value(mdp.identity, 0));
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disparity::ViewingGeometry;

    #[test]
    fn default_grid_is_the_full_lattice() {
        let scene = DisparityMap::constant(8, 8, 10.0).unwrap();
        let mdp = RatioGridMDP::build(&scene, &EnvConfig::default()).unwrap();
        // 0.2 ..= 2.0 step 0.05
        assert_eq!(mdp.len(), 37);
        assert_eq!(mdp.ratios[0], 0.2);
        assert_eq!(*mdp.ratios.last().unwrap(), 2.0);
        assert_eq!(mdp.ratios[mdp.identity], 1.0);
        assert!(mdp.ratios.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn flat_scene_prefers_identity() {
        let scene = DisparityMap::constant(8, 8, 0.0).unwrap();
        let res = grid_search(&scene, &EnvConfig::default()).unwrap();
        assert_eq!(res.best_ratio, 1.0);
        assert_eq!(res.best_vc, 5.0);
        assert_eq!(res.best_action_sequence, vec![Action::Stop]);
    }

    #[test]
    fn constant_violating_scene_by_enumeration() {
        let config = EnvConfig::default();
        let px = ViewingGeometry::default().pixels_for_degrees(1.5);
        let scene = DisparityMap::constant(8, 8, px).unwrap();
        let res = grid_search(&scene, &config).unwrap();
        // exhaustive enumeration of every grid ratio
        let mut best = (f64::NEG_INFINITY, 0.0);
        for k in -16..=20 {
            let r = config.snap_ratio(1.0 + k as f64 * config.delta);
            let (_, s) = config.evaluate(&scene, r).unwrap();
            if s.vc > best.0 {
                best = (s.vc, r);
            }
        }
        assert_eq!(res.best_vc, best.0);
        assert_eq!(res.best_ratio, best.1);
        // the default model has no depth term, so the smallest ratio wins
        assert_eq!(res.best_ratio, config.r_min);
        assert!(res.best_vc >= res.vc_at_identity);
        assert_eq!(res.best_action_sequence.len(), 17);
    }
}
