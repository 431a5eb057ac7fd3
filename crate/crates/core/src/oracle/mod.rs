//! Exact reference solutions over the finite ratio grid.

mod grid;
mod vi;

pub use grid::{grid_search, solve, OracleResult, RatioGridMDP};
pub use vi::{value_iteration, ValueTable};

use crate::env::Transition;
use crate::error::{Error, Result};

/// Comfort the agent left on the table: `best_vc - final VC`.
///
/// The trajectory must come from the same scene and configuration as the
/// oracle; a differing initial comfort is reported as a mismatch.
pub fn regret(trajectory: &[Transition], oracle: &OracleResult) -> Result<f64> {
    let (first, last) = match (trajectory.first(), trajectory.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::ConfigMismatch("empty trajectory".into())),
    };
    if first.state.score.vc.to_bits() != oracle.vc_at_identity.to_bits() {
        return Err(Error::ConfigMismatch(format!(
            "trajectory starts at VC {} but the oracle saw {}",
            first.state.score.vc, oracle.vc_at_identity
        )));
    }
    let gap = oracle.best_vc - last.next_state.score.vc;
    if gap < -1e-9 {
        return Err(Error::ConfigMismatch(format!(
            "agent beat the oracle by {}; scene or config differ",
            -gap
        )));
    }
    Ok(gap.max(0.0))
}
