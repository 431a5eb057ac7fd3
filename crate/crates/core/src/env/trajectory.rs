use std::fmt::Write as _;
use std::fs::OpenOptions;
use std::io::Write as _;
use std::path::Path;

use super::Transition;
use crate::error::{Error, Result};

/// `t` is the step index before the transition; ratio, vc and depth are
/// the values after it.
pub const TRAJECTORY_HEADER: &str = "episode,t,ratio,action,vc,depth,reward,done";

/// Writes (or appends to) a trajectory CSV, one row per transition.
pub fn write_trajectory_csv(path: &Path, episode: usize, transitions: &[Transition], append: bool) -> Result<()> {
    let fresh = !append || !path.exists();
    let mut out = String::new();
    if fresh {
        out.push_str(TRAJECTORY_HEADER);
        out.push('\n');
    }
    for tr in transitions {
        let next = &tr.next_state;
        writeln!(
            out,
            "{episode},{},{},{},{},{},{},{}",
            tr.state.camera.step, next.camera.ratio, tr.action, next.score.vc, next.score.depth, tr.reward, tr.done
        )
        .unwrap();
    }
    let mut file = OpenOptions::new()
        .create(true)
        .write(true)
        .append(!fresh)
        .truncate(fresh)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    file.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}
