//! Comparing hopping observations with single-device baselines.

use serde::{Deserialize, Serialize};

use crate::audio::{AudioStatus, StreamUsage};
use crate::ids::{AppId, DeviceId};
use crate::superdevice::{ObservedApp, Observation};

use super::baseline::{Baseline, StatusPair};
use super::generate::{TestCase, TestKind};
use super::CampaignError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum IssueKind {
    /// Audio kept coming out of the wrong device.
    Mod,
    /// The conflict was resolved differently than on a single device.
    Mor,
}

impl IssueKind {
    pub fn as_str(self) -> &'static str {
        match self {
            IssueKind::Mod => "MOD",
            IssueKind::Mor => "MOR",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "subtype", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MorSubtype {
    DuckToPlay,
    DuckToStop,
    StopToPlay,
    Other {
        expected: StatusPair,
        observed: StatusPair,
    },
}

impl MorSubtype {
    pub fn classify(expected: StatusPair, observed: StatusPair) -> Self {
        use AudioStatus::*;
        match (expected.pre, observed.pre) {
            (Duck, Play) => MorSubtype::DuckToPlay,
            (Duck, Stop) => MorSubtype::DuckToStop,
            (Stop, Play) => MorSubtype::StopToPlay,
            _ => MorSubtype::Other { expected, observed },
        }
    }

    pub fn label(&self) -> String {
        match self {
            MorSubtype::DuckToPlay => "DUCK_TO_PLAY".into(),
            MorSubtype::DuckToStop => "DUCK_TO_STOP".into(),
            MorSubtype::StopToPlay => "STOP_TO_PLAY".into(),
            MorSubtype::Other { expected, observed } => format!("OTHER{expected}->{observed}"),
        }
    }
}

/// Which app was the earlier-playing one on the conflict device.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RoleOrder {
    CollabPre,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DedupeKey {
    pub tested_app: AppId,
    /// (collaborator usage, tested usage)
    pub usages: (Option<StreamUsage>, Option<StreamUsage>),
    pub kind: IssueKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subtype: Option<MorSubtype>,
    pub roles: RoleOrder,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Issue {
    pub kind: IssueKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subtype: Option<MorSubtype>,
    pub tested_app: AppId,
    pub collaborator: AppId,
    pub test_case: String,
    pub test_kind: TestKind,
    pub repetition: usize,
    pub conflict_device: DeviceId,
    /// Baseline pair (collaborator, tested); absent only for MoD issues
    /// whose baseline was not consulted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<StatusPair>,
    pub observed: StatusPair,
    /// App whose behaviour deviates: the collaborator when its own status
    /// is off, the tested app otherwise.
    pub culprit: AppId,
    pub dedupe_key: DedupeKey,
}

fn find<'a>(obs: &'a Observation, app: &AppId) -> Option<(&'a DeviceId, &'a ObservedApp)> {
    obs.find(app)
}

/// Classify every observation of `tc` against `baseline`.
pub fn detect(
    tc: &TestCase,
    observations: &[Observation],
    baseline: &Baseline,
) -> Result<Vec<Issue>, CampaignError> {
    let missing = || CampaignError::MissingBaseline {
        test: tc.id.clone(),
        tested_window: tc.target_state.window.clone(),
        collab_window: tc.collab_state.window.clone(),
    };
    let entry = baseline.entry(&tc.target_state.window, &tc.collab_state.window);
    let mut issues = Vec::new();
    for (repetition, obs) in observations.iter().enumerate() {
        let lost = |app: &AppId| CampaignError::Replay {
            test: tc.id.clone(),
            reason: format!("{app} is missing from the final snapshot"),
        };
        let (host, tested) = find(obs, &tc.tested_app).ok_or_else(|| lost(&tc.tested_app))?;
        let (_, collab) = find(obs, &tc.collaborator).ok_or_else(|| lost(&tc.collaborator))?;
        let observed = StatusPair {
            pre: collab.status,
            post: tested.status,
        };
        let usages = (collab.usage, tested.usage);
        let issue = |kind, subtype: Option<MorSubtype>, expected, culprit: &AppId| Issue {
            kind,
            subtype: subtype.clone(),
            tested_app: tc.tested_app.clone(),
            collaborator: tc.collaborator.clone(),
            test_case: tc.id.clone(),
            test_kind: tc.kind,
            repetition,
            conflict_device: tc.conflict_device().clone(),
            expected,
            observed,
            culprit: culprit.clone(),
            dedupe_key: DedupeKey {
                tested_app: tc.tested_app.clone(),
                usages,
                kind,
                subtype,
                roles: RoleOrder::CollabPre,
            },
        };

        if &tested.sink != host {
            let expected = entry.map(|e| e.collab_first);
            issues.push(issue(IssueKind::Mod, None, expected, &tc.tested_app));
            continue;
        }
        let expected = entry.ok_or_else(missing)?.collab_first;
        if expected != observed {
            let culprit = if expected.pre != observed.pre {
                &tc.collaborator
            } else {
                &tc.tested_app
            };
            let subtype = MorSubtype::classify(expected, observed);
            issues.push(issue(IssueKind::Mor, Some(subtype), Some(expected), culprit));
        }
    }
    Ok(issues)
}
