use super::grid::RatioGridMDP;
use crate::agent::argmax_lowest;
use crate::env::Action;

/// Optimal values `V*(ratio, t)` for `t = 0..=t_max` and the greedy policy
/// for `t < t_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    n: usize,
    horizon: usize,
    values: Vec<f64>,
    policy: Vec<Action>,
}

impl ValueTable {
    pub fn value(&self, ratio_index: usize, t: usize) -> f64 {
        self.values[t * self.n + ratio_index]
    }

    pub fn action(&self, ratio_index: usize, t: usize) -> Action {
        self.policy[t * self.n + ratio_index]
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Action values `r + gamma * V*(next, t + 1)` (future zero when done).
    pub fn q_values(&self, mdp: &RatioGridMDP, i: usize, t: usize, gamma: f64) -> [f64; 3] {
        Action::ALL.map(|a| {
            let (j, r, done) = mdp.transition(i, t, a);
            if done {
                r
            } else {
                r + gamma * self.value(j, t + 1)
            }
        })
    }
}

/// Backward induction from `V*(., t_max) = 0`. Greedy ties go to the lowest
/// action index.
pub fn value_iteration(mdp: &RatioGridMDP, gamma: f64) -> ValueTable {
    let n = mdp.len();
    let horizon = mdp.horizon();
    let mut table = ValueTable {
        n,
        horizon,
        values: vec![0.0; (horizon + 1) * n],
        policy: vec![Action::Stop; horizon * n],
    };
    for t in (0..horizon).rev() {
        for i in 0..n {
            let q = table.q_values(mdp, i, t, gamma);
            let best = argmax_lowest(&q);
            table.values[t * n + i] = q[best];
            table.policy[t * n + i] = Action::ALL[best];
        }
    }
    table
}
