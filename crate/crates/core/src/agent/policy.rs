use rand::Rng;
use serde::{Deserialize, Serialize};

use super::network::QNetwork;
use crate::env::Action;
use crate::error::Result;

/// Index of the largest value; ties go to the lowest index.
pub fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Epsilon-greedy choice. One uniform draw decides explore vs exploit; an
/// exploring step draws a second, uniform over the actions.
pub fn select_action(net: &QNetwork, x: &[f64], epsilon: f64, rng: &mut impl Rng) -> Result<usize> {
    let q = net.forward(x)?;
    if rng.random::<f64>() < epsilon {
        Ok(rng.random_range(0..Action::COUNT))
    } else {
        Ok(argmax_lowest(&q))
    }
}

/// Linear decay from `start` to `end` over `decay_steps`, constant after.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub decay_steps: usize,
}

impl EpsilonSchedule {
    pub fn value(&self, step: usize) -> f64 {
        if step >= self.decay_steps {
            return self.end;
        }
        let frac = step as f64 / self.decay_steps as f64;
        self.start + (self.end - self.start) * frac
    }
}
