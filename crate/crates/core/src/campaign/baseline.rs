//! Single-device reference resolutions for an app pair.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::astg::{Ass, Astg, EventDescriptor};
use crate::audio::{AudioStatus, ResolutionMatrix};
use crate::env::{Registry, Sandbox};
use crate::explore::{drive_to, ExploreError};
use crate::ids::{AppId, DeviceId};

/// Statuses of the earlier-playing and the later-playing app of a conflict.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StatusPair {
    pub pre: AudioStatus,
    pub post: AudioStatus,
}

impl std::fmt::Display for StatusPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.pre, self.post)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaselineEntry {
    pub tested_window: String,
    pub collab_window: String,
    /// Collaborator plays first: `pre` is the collaborator.
    pub collab_first: StatusPair,
    /// Tested app plays first: `pre` is the tested app.
    pub tested_first: StatusPair,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Baseline {
    pub tested_app: AppId,
    pub collaborator: AppId,
    pub entries: Vec<BaselineEntry>,
}

impl Baseline {
    pub fn entry(&self, tested_window: &str, collab_window: &str) -> Option<&BaselineEntry> {
        self.entries
            .iter()
            .find(|e| e.tested_window == tested_window && e.collab_window == collab_window)
    }
}

/// Drive `first` to `s_first`, then `second` along its path, on one device.
fn order(
    registry: &Arc<Registry>,
    matrix: &ResolutionMatrix,
    first: (&AppId, &[EventDescriptor], &Ass),
    second: (&AppId, &[EventDescriptor]),
) -> Result<StatusPair, ExploreError> {
    let device = DeviceId::from("solo");
    let mut env = Sandbox::new([device.clone()], registry.clone(), matrix.clone(), 0);
    drive_to(&mut env, &device, first.0, first.1, first.2)?;
    env.launch(&device, second.0)?;
    for ev in second.1 {
        env.fire(second.0, ev)?;
    }
    Ok(StatusPair {
        pre: env.ass(first.0)?.status,
        post: env.ass(second.0)?.status,
    })
}

/// Reference statuses for every (tested PLAY window, collaborator PLAY
/// window) pair, in both launch orders.
pub fn compute_baseline(
    tested: &Astg,
    collab: &Astg,
    registry: &Arc<Registry>,
    matrix: &ResolutionMatrix,
) -> Result<Baseline, ExploreError> {
    let mut entries = Vec::new();
    for s in tested.states_with(AudioStatus::Play) {
        let ps = tested.path_to(&s)?;
        for c in collab.states_with(AudioStatus::Play) {
            let pc = collab.path_to(&c)?;
            let collab_first = order(registry, matrix, (&collab.app, &pc, &c), (&tested.app, &ps))?;
            let tested_first = order(registry, matrix, (&tested.app, &ps, &s), (&collab.app, &pc))?;
            entries.push(BaselineEntry {
                tested_window: s.window.clone(),
                collab_window: c.window.clone(),
                collab_first,
                tested_first,
            });
        }
    }
    Ok(Baseline {
        tested_app: tested.app.clone(),
        collaborator: collab.app.clone(),
        entries,
    })
}
