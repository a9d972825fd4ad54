//! Hopping test cases built from a pair of graphs.

use serde::{Deserialize, Serialize};

use crate::astg::{Ass, Astg, EventDescriptor, GraphError};
use crate::audio::AudioStatus;
use crate::ids::{AppId, DeviceId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TestKind {
    StartHop,
    EndHop,
}

impl TestKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TestKind::StartHop => "START_HOP",
            TestKind::EndHop => "END_HOP",
        }
    }
}

impl std::fmt::Display for TestKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One replayable action of a test case.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum Step {
    Launch {
        device: DeviceId,
        app: AppId,
    },
    Fire {
        device: DeviceId,
        app: AppId,
        event: EventDescriptor,
    },
    StartHop {
        source: DeviceId,
        app: AppId,
        target: DeviceId,
    },
    EndHop,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCase {
    pub id: String,
    pub kind: TestKind,
    pub tested_app: AppId,
    pub collaborator: AppId,
    /// Play-like state the tested app is driven to.
    pub target_state: Ass,
    /// PLAY state the collaborator is driven to.
    pub collab_state: Ass,
    pub devices: (DeviceId, DeviceId),
    pub e_tested: Vec<Step>,
    pub e_collab: Vec<Step>,
    pub final_op: Step,
}

impl TestCase {
    /// Device on which the two streams meet after the final operation.
    pub fn conflict_device(&self) -> &DeviceId {
        match self.kind {
            TestKind::StartHop => &self.devices.1,
            TestKind::EndHop => &self.devices.0,
        }
    }

    pub fn steps(&self) -> impl Iterator<Item = &Step> {
        self.e_tested
            .iter()
            .chain(&self.e_collab)
            .chain(std::iter::once(&self.final_op))
    }
}

fn drive<'a>(device: &'a DeviceId, app: &AppId, path: Vec<EventDescriptor>) -> impl Iterator<Item = Step> + 'a {
    let app = app.clone();
    path.into_iter().map(move |event| Step::Fire {
        device: device.clone(),
        app: app.clone(),
        event,
    })
}

/// The collaborator's target: its first PLAY state in sorted order.
pub fn collaborator_target(g: &Astg) -> Option<Ass> {
    g.states_with(AudioStatus::Play).into_iter().next()
}

fn generate(
    kind: TestKind,
    tested: &Astg,
    collab: &Astg,
    d1: &DeviceId,
    d2: &DeviceId,
) -> Result<Vec<TestCase>, GraphError> {
    let Some(collab_state) = collaborator_target(collab) else {
        return Ok(Vec::new());
    };
    let collab_path = collab.path_to(&collab_state)?;
    let a = &tested.app;
    let c = &collab.app;
    let mut out = Vec::new();
    for (i, s) in tested.play_like_states().into_iter().enumerate() {
        let path = tested.path_to(&s)?;
        let launch = Step::Launch {
            device: d1.clone(),
            app: a.clone(),
        };
        let (e_tested, e_collab, final_op) = match kind {
            TestKind::StartHop => {
                let e_tested = std::iter::once(launch).chain(drive(d1, a, path)).collect();
                let e_collab = std::iter::once(Step::Launch {
                    device: d2.clone(),
                    app: c.clone(),
                })
                .chain(drive(d2, c, collab_path.clone()))
                .collect();
                let hop = Step::StartHop {
                    source: d1.clone(),
                    app: a.clone(),
                    target: d2.clone(),
                };
                (e_tested, e_collab, hop)
            }
            TestKind::EndHop => {
                let hop = Step::StartHop {
                    source: d1.clone(),
                    app: a.clone(),
                    target: d2.clone(),
                };
                let e_tested = [launch, hop].into_iter().chain(drive(d2, a, path)).collect();
                let e_collab = std::iter::once(Step::Launch {
                    device: d1.clone(),
                    app: c.clone(),
                })
                .chain(drive(d1, c, collab_path.clone()))
                .collect();
                (e_tested, e_collab, Step::EndHop)
            }
        };
        out.push(TestCase {
            id: format!("{a}/{c}/{kind}/{i}"),
            kind,
            tested_app: a.clone(),
            collaborator: c.clone(),
            target_state: s,
            collab_state: collab_state.clone(),
            devices: (d1.clone(), d2.clone()),
            e_tested,
            e_collab,
            final_op,
        });
    }
    Ok(out)
}

/// Drive the tested app on `d1`, the collaborator on `d2`, then hop.
pub fn gen_start_hop(
    tested: &Astg,
    collab: &Astg,
    d1: &DeviceId,
    d2: &DeviceId,
) -> Result<Vec<TestCase>, GraphError> {
    generate(TestKind::StartHop, tested, collab, d1, d2)
}

/// Hop the tested app to `d2` and drive it there, drive the collaborator
/// on `d1`, then end the hop.
pub fn gen_end_hop(
    tested: &Astg,
    collab: &Astg,
    d1: &DeviceId,
    d2: &DeviceId,
) -> Result<Vec<TestCase>, GraphError> {
    generate(TestKind::EndHop, tested, collab, d1, d2)
}

/// Both kinds of test for `tested` against every graph in `collaborators`.
pub fn gen_all(
    tested: &Astg,
    collaborators: &[&Astg],
    d1: &DeviceId,
    d2: &DeviceId,
) -> Result<Vec<TestCase>, GraphError> {
    let mut out = Vec::new();
    for c in collaborators.iter().filter(|c| c.app != tested.app) {
        out.extend(gen_start_hop(tested, c, d1, d2)?);
        out.extend(gen_end_hop(tested, c, d1, d2)?);
    }
    Ok(out)
}
