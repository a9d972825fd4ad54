//! Small-step interpreter for app hopping inside a super device.
//!
//! The global state is a sequence of devices, each holding an [`AppStack`],
//! plus at most one active hop. Every stack is ordered by focus recency: the
//! front instance is the most recent focus requester, so in any conflict the
//! instance closer to the back is the "pre" stream.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audio::{
    arbitrate, most_restrictive, AudioStatus, ReactionTable, ReactionVariant, ResolutionMatrix,
    ResolutionOutcome, StreamUsage,
};
use crate::ids::{AppId, DeviceId, WindowId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("app {0} is already present in the super device")]
    DuplicateApp(AppId),
    #[error("app {0} is not present")]
    NoSuchApp(AppId),
    #[error("unknown device {0}")]
    UnknownDevice(DeviceId),
    #[error("device {0} declared twice")]
    DuplicateDevice(DeviceId),
    #[error("app {app} is not on source device {device}")]
    AppNotOnSource { app: AppId, device: DeviceId },
    #[error("app {app} is not on device {device}")]
    AppNotOnDevice { app: AppId, device: DeviceId },
    #[error("source and target are both {0}")]
    SameDevice(DeviceId),
    #[error("no active hop")]
    NoActiveHop,
    #[error("app {0} has a play-like status but no stream usage")]
    SilentStream(AppId),
    #[error("focus can only be released to STOP or PAUSE, not {0}")]
    InvalidRelease(AudioStatus),
}

/// An app instance on a device stack.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppInst {
    pub app: AppId,
    /// Active stream type, absent while the app never requested focus.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub usage: Option<StreamUsage>,
    pub status: AudioStatus,
    /// Device physically emitting this app's audio.
    pub sink: DeviceId,
}

impl AppInst {
    pub fn silent(app: impl Into<AppId>, host: impl Into<DeviceId>) -> Self {
        Self {
            app: app.into(),
            usage: None,
            status: AudioStatus::Stop,
            sink: host.into(),
        }
    }

    pub fn playing(
        app: impl Into<AppId>,
        usage: StreamUsage,
        status: AudioStatus,
        host: impl Into<DeviceId>,
    ) -> Self {
        Self {
            app: app.into(),
            usage: Some(usage),
            status,
            sink: host.into(),
        }
    }
}

/// One pairwise resolution performed while adding an instance to a stack.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arbitration {
    pub pre_app: AppId,
    pub post_app: AppId,
    pub outcome: ResolutionOutcome,
    pub pre_status: AudioStatus,
    pub post_status: AudioStatus,
}

impl Arbitration {
    /// The pre stream is still audible or will be once the conflict ends.
    pub fn is_resumable(&self) -> bool {
        self.pre_status.is_play_like() && self.post_status.is_play_like()
    }
}

/// Source of per-app reaction tables for an arbitration round.
pub trait Reactions {
    fn reaction(&self, app: &AppId) -> Option<&ReactionTable>;
}

/// No app deviates from the matrix.
pub struct NoReactions;

impl Reactions for NoReactions {
    fn reaction(&self, _app: &AppId) -> Option<&ReactionTable> {
        None
    }
}

impl Reactions for BTreeMap<AppId, ReactionTable> {
    fn reaction(&self, app: &AppId) -> Option<&ReactionTable> {
        self.get(app)
    }
}

/// Reaction tables of the registered profiles, restricted to one variant.
pub struct ProfileReactions<'a> {
    pub profiles: &'a BTreeMap<AppId, AppProfile>,
    pub variant: ReactionVariant,
}

impl Reactions for ProfileReactions<'_> {
    fn reaction(&self, app: &AppId) -> Option<&ReactionTable> {
        self.profiles.get(app).map(|p| p.reactions(self.variant))
    }
}

/// Apps on one device, front = most recent focus requester.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AppStack(Vec<AppInst>);

impl AppStack {
    pub fn new() -> Self {
        Self::default()
    }

    /// Build a stack verbatim, front first. No arbitration is performed.
    pub fn from_instances(apps: Vec<AppInst>) -> Result<Self, SemanticsError> {
        let mut seen = std::collections::BTreeSet::new();
        for a in &apps {
            if !seen.insert(a.app.clone()) {
                return Err(SemanticsError::DuplicateApp(a.app.clone()));
            }
            if a.status.is_play_like() && a.usage.is_none() {
                return Err(SemanticsError::SilentStream(a.app.clone()));
            }
        }
        Ok(Self(apps))
    }

    pub fn iter(&self) -> std::slice::Iter<'_, AppInst> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, app: &AppId) -> Option<&AppInst> {
        self.0.iter().find(|a| &a.app == app)
    }

    pub fn contains(&self, app: &AppId) -> bool {
        self.get(app).is_some()
    }

    pub fn front(&self) -> Option<&AppInst> {
        self.0.first()
    }

    /// `(app, status)` pairs, front first.
    pub fn statuses(&self) -> Vec<(AppId, AudioStatus)> {
        self.0.iter().map(|a| (a.app.clone(), a.status)).collect()
    }

    fn get_mut(&mut self, app: &AppId) -> Option<&mut AppInst> {
        self.0.iter_mut().find(|a| &a.app == app)
    }

    /// Push `inst` to the front. A play-like newcomer conflicts with every
    /// instance currently in `PLAY`; each of those takes its pre status, and
    /// the newcomer keeps the most restrictive of its post statuses.
    pub fn add_app(
        &mut self,
        mut inst: AppInst,
        matrix: &ResolutionMatrix,
        reactions: &dyn Reactions,
    ) -> Result<Vec<Arbitration>, SemanticsError> {
        if self.contains(&inst.app) {
            return Err(SemanticsError::DuplicateApp(inst.app));
        }
        let mut log = Vec::new();
        if inst.status.is_play_like() {
            let post_usage = inst
                .usage
                .ok_or_else(|| SemanticsError::SilentStream(inst.app.clone()))?;
            let mut own = AudioStatus::Play;
            for holder in self.0.iter_mut().filter(|a| a.status == AudioStatus::Play) {
                let Some(pre_usage) = holder.usage else {
                    continue;
                };
                let (pre, post) = arbitrate(
                    pre_usage,
                    reactions.reaction(&holder.app),
                    post_usage,
                    reactions.reaction(&inst.app),
                    matrix,
                );
                log.push(Arbitration {
                    pre_app: holder.app.clone(),
                    post_app: inst.app.clone(),
                    outcome: matrix.get(pre_usage, post_usage),
                    pre_status: pre,
                    post_status: post,
                });
                holder.status = pre;
                own = most_restrictive(own, post);
            }
            inst.status = own;
        }
        self.0.insert(0, inst);
        Ok(log)
    }

    /// Remove `app`. If it was audible, the remaining conflicts are
    /// re-resolved from scratch (see [`AppStack::rearbitrate`]).
    pub fn rmv_app(
        &mut self,
        app: &AppId,
        matrix: &ResolutionMatrix,
        reactions: &dyn Reactions,
    ) -> Result<(AppInst, Vec<Arbitration>), SemanticsError> {
        let idx = self
            .0
            .iter()
            .position(|a| &a.app == app)
            .ok_or_else(|| SemanticsError::NoSuchApp(app.clone()))?;
        let removed = self.0.remove(idx);
        let log = if removed.status.is_play_like() {
            self.rearbitrate(matrix, reactions)?
        } else {
            Vec::new()
        };
        Ok((removed, log))
    }

    /// Restore every ducked or conflict-paused instance to `PLAY`, then
    /// re-add all instances oldest first so that surviving conflicts
    /// reassert themselves. Stopped instances stay stopped.
    pub fn rearbitrate(
        &mut self,
        matrix: &ResolutionMatrix,
        reactions: &dyn Reactions,
    ) -> Result<Vec<Arbitration>, SemanticsError> {
        let old = std::mem::take(&mut self.0);
        let mut log = Vec::new();
        for mut inst in old.into_iter().rev() {
            if inst.status.is_conflict_only() {
                inst.status = AudioStatus::Play;
            }
            log.extend(self.add_app(inst, matrix, reactions)?);
        }
        Ok(log)
    }
}

/// A device and its app stack.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviceInst {
    pub device: DeviceId,
    pub stack: AppStack,
}

/// The active hop: `app` moved from `source` to `target`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hop {
    pub source: DeviceId,
    pub app: AppId,
    pub target: DeviceId,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AudioMigration {
    #[default]
    Correct,
    /// Audio keeps coming out of the source device after a hop.
    StuckOnSource,
}

/// How an app's audio output behaves when the app is hopped.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HopFault {
    pub audio_migration: AudioMigration,
    /// Chance that a hop triggers the migration fault, in `[0, 1]`.
    #[serde(default)]
    pub probability: f64,
}

impl HopFault {
    pub fn stuck(probability: f64) -> Self {
        Self {
            audio_migration: AudioMigration::StuckOnSource,
            probability,
        }
    }

    pub fn is_inert(&self) -> bool {
        self.audio_migration == AudioMigration::Correct || self.probability <= 0.0
    }
}

/// Everything the super device needs to know about an app's audio behaviour.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AppProfile {
    #[serde(default)]
    pub normal: ReactionTable,
    #[serde(default)]
    pub hopping: ReactionTable,
    #[serde(default)]
    pub fault: HopFault,
}

impl AppProfile {
    pub fn reactions(&self, variant: ReactionVariant) -> &ReactionTable {
        match variant {
            ReactionVariant::Normal => &self.normal,
            ReactionVariant::Hopping => &self.hopping,
        }
    }
}

/// Side effects of a hop, for property checks and traces.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HopEffect {
    pub fault_fired: bool,
    /// Re-resolutions on the device the app left.
    pub left: Vec<Arbitration>,
    /// Resolutions on the device the app arrived at.
    pub arrived: Vec<Arbitration>,
}

/// An operation on the super device.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Op {
    Launch {
        device: DeviceId,
        app: AppId,
    },
    Close {
        device: DeviceId,
        app: AppId,
    },
    RequestFocus {
        device: DeviceId,
        app: AppId,
        usage: StreamUsage,
    },
    ReleaseFocus {
        device: DeviceId,
        app: AppId,
        status: AudioStatus,
    },
    StartHop {
        source: DeviceId,
        app: AppId,
        target: DeviceId,
    },
    EndHop,
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Op::Launch { device, app } => write!(f, "{device}.Launch({app})"),
            Op::Close { device, app } => write!(f, "{device}.Close({app})"),
            Op::RequestFocus { device, app, usage } => {
                write!(f, "{device}.RequestFocus({app}, {usage})")
            }
            Op::ReleaseFocus {
                device,
                app,
                status,
            } => write!(f, "{device}.ReleaseFocus({app}, {status})"),
            Op::StartHop {
                source,
                app,
                target,
            } => write!(f, "{source}.StartHop({app}, {target})"),
            Op::EndHop => f.write_str("EndHop"),
        }
    }
}

/// The global state rewritten by the hopping rules.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperDevice {
    devices: Vec<DeviceInst>,
    hop: Option<Hop>,
    matrix: ResolutionMatrix,
    profiles: BTreeMap<AppId, AppProfile>,
    seed: u64,
    rng: ChaCha8Rng,
}

impl SuperDevice {
    pub fn new<I, D>(devices: I, matrix: ResolutionMatrix, seed: u64) -> Result<Self, SemanticsError>
    where
        I: IntoIterator<Item = D>,
        D: Into<DeviceId>,
    {
        let mut sd = Self {
            devices: Vec::new(),
            hop: None,
            matrix,
            profiles: BTreeMap::new(),
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        };
        for d in devices {
            sd.add_device(d.into(), AppStack::new())?;
        }
        Ok(sd)
    }

    /// Attach a device with a pre-built stack. Apps found on it get a default
    /// profile unless one was registered already.
    pub fn add_device(&mut self, device: DeviceId, stack: AppStack) -> Result<(), SemanticsError> {
        if self.device(&device).is_some() {
            return Err(SemanticsError::DuplicateDevice(device));
        }
        for inst in stack.iter() {
            if self.locate(&inst.app).is_some() {
                return Err(SemanticsError::DuplicateApp(inst.app.clone()));
            }
        }
        for inst in stack.iter() {
            self.profiles.entry(inst.app.clone()).or_default();
        }
        self.devices.push(DeviceInst { device, stack });
        Ok(())
    }

    pub fn set_profile(&mut self, app: AppId, profile: AppProfile) {
        self.profiles.insert(app, profile);
    }

    pub fn profile(&self, app: &AppId) -> Option<&AppProfile> {
        self.profiles.get(app)
    }

    pub fn devices(&self) -> &[DeviceInst] {
        &self.devices
    }

    pub fn device(&self, id: &DeviceId) -> Option<&DeviceInst> {
        self.devices.iter().find(|d| &d.device == id)
    }

    pub fn stack(&self, id: &DeviceId) -> Option<&AppStack> {
        self.device(id).map(|d| &d.stack)
    }

    pub fn hop(&self) -> Option<&Hop> {
        self.hop.as_ref()
    }

    pub fn matrix(&self) -> &ResolutionMatrix {
        &self.matrix
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Device currently hosting `app`.
    pub fn locate(&self, app: &AppId) -> Option<&DeviceId> {
        self.devices
            .iter()
            .find(|d| d.stack.contains(app))
            .map(|d| &d.device)
    }

    pub fn instance(&self, app: &AppId) -> Option<(&DeviceId, &AppInst)> {
        self.devices
            .iter()
            .find_map(|d| d.stack.get(app).map(|inst| (&d.device, inst)))
    }

    fn require_device(&self, id: &DeviceId) -> Result<usize, SemanticsError> {
        self.devices
            .iter()
            .position(|d| &d.device == id)
            .ok_or_else(|| SemanticsError::UnknownDevice(id.clone()))
    }

    fn require_resident(&self, device: &DeviceId, app: &AppId) -> Result<usize, SemanticsError> {
        let idx = self.require_device(device)?;
        if self.devices[idx].stack.contains(app) {
            Ok(idx)
        } else {
            Err(SemanticsError::AppNotOnDevice {
                app: app.clone(),
                device: device.clone(),
            })
        }
    }

    fn split(&mut self, variant: ReactionVariant) -> (&mut Vec<DeviceInst>, &ResolutionMatrix, ProfileReactions<'_>) {
        (
            &mut self.devices,
            &self.matrix,
            ProfileReactions {
                profiles: &self.profiles,
                variant,
            },
        )
    }

    /// Place a silent instance of `app` at the back of `device`'s stack.
    pub fn launch_app(
        &mut self,
        device: &DeviceId,
        app: AppId,
        profile: AppProfile,
    ) -> Result<(), SemanticsError> {
        let idx = self.require_device(device)?;
        if self.locate(&app).is_some() {
            return Err(SemanticsError::DuplicateApp(app));
        }
        self.devices[idx]
            .stack
            .0
            .push(AppInst::silent(app.clone(), device.clone()));
        self.profiles.insert(app, profile);
        Ok(())
    }

    /// Terminate `app`. Closing the hopped app also drops the hop relation.
    pub fn close_app(&mut self, device: &DeviceId, app: &AppId) -> Result<AppInst, SemanticsError> {
        let idx = self.require_resident(device, app)?;
        let (devices, matrix, reactions) = self.split(ReactionVariant::Normal);
        let (inst, _) = devices[idx].stack.rmv_app(app, matrix, &reactions)?;
        if self.hop.as_ref().is_some_and(|h| &h.app == app) {
            self.hop = None;
        }
        Ok(inst)
    }

    /// Local play event: `app` starts a `usage` stream and becomes the most
    /// recent focus requester on its device.
    pub fn request_focus(
        &mut self,
        device: &DeviceId,
        app: &AppId,
        usage: StreamUsage,
    ) -> Result<Vec<Arbitration>, SemanticsError> {
        let idx = self.require_resident(device, app)?;
        let (devices, matrix, reactions) = self.split(ReactionVariant::Normal);
        let stack = &mut devices[idx].stack;
        let (mut inst, mut log) = stack.rmv_app(app, matrix, &reactions)?;
        inst.usage = Some(usage);
        inst.status = AudioStatus::Play;
        log.extend(stack.add_app(inst, matrix, &reactions)?);
        Ok(log)
    }

    /// Local pause/stop event. The instance keeps its stack position.
    pub fn release_focus(
        &mut self,
        device: &DeviceId,
        app: &AppId,
        status: AudioStatus,
    ) -> Result<Vec<Arbitration>, SemanticsError> {
        if !matches!(status, AudioStatus::Stop | AudioStatus::Pause) {
            return Err(SemanticsError::InvalidRelease(status));
        }
        let idx = self.require_resident(device, app)?;
        let (devices, matrix, reactions) = self.split(ReactionVariant::Normal);
        let stack = &mut devices[idx].stack;
        let inst = stack.get_mut(app).expect("residency checked");
        let was_audible = inst.status.is_play_like();
        inst.status = status;
        if was_audible {
            stack.rearbitrate(matrix, &reactions)
        } else {
            Ok(Vec::new())
        }
    }

    /// Hop `app` from `source` to `target`, ending any active hop first.
    pub fn start_hop(
        &mut self,
        source: &DeviceId,
        app: &AppId,
        target: &DeviceId,
    ) -> Result<HopEffect, SemanticsError> {
        if source == target {
            return Err(SemanticsError::SameDevice(source.clone()));
        }
        let src = self.require_device(source)?;
        let dst = self.require_device(target)?;
        // where the app will be once a pending hop has been undone
        let location = match &self.hop {
            Some(h) if &h.app == app => Some(&h.source),
            _ => self.locate(app),
        };
        if location != Some(source) {
            return Err(SemanticsError::AppNotOnSource {
                app: app.clone(),
                device: source.clone(),
            });
        }
        if self.hop.is_some() {
            self.end_hop()?;
        }

        let draw: f64 = self.rng.gen();
        let fired = self
            .profiles
            .get(app)
            .is_some_and(|p| !p.fault.is_inert() && draw < p.fault.probability);

        let (devices, matrix, reactions) = self.split(ReactionVariant::Normal);
        let (mut inst, left) = devices[src].stack.rmv_app(app, matrix, &reactions)?;
        inst.sink = if fired { source.clone() } else { target.clone() };
        let (devices, matrix, reactions) = self.split(ReactionVariant::Hopping);
        let arrived = devices[dst].stack.add_app(inst, matrix, &reactions)?;

        self.hop = Some(Hop {
            source: source.clone(),
            app: app.clone(),
            target: target.clone(),
        });
        Ok(HopEffect {
            fault_fired: fired,
            left,
            arrived,
        })
    }

    /// Bring the hopped app back to its source device.
    pub fn end_hop(&mut self) -> Result<HopEffect, SemanticsError> {
        let hop = self.hop.clone().ok_or(SemanticsError::NoActiveHop)?;
        let src = self.require_device(&hop.source)?;
        let dst = self.require_device(&hop.target)?;
        let (devices, matrix, reactions) = self.split(ReactionVariant::Normal);
        let (mut inst, left) = devices[dst].stack.rmv_app(&hop.app, matrix, &reactions)?;
        inst.sink = hop.source.clone();
        let (devices, matrix, reactions) = self.split(ReactionVariant::Hopping);
        let arrived = devices[src].stack.add_app(inst, matrix, &reactions)?;
        self.hop = None;
        Ok(HopEffect {
            fault_fired: false,
            left,
            arrived,
        })
    }

    /// Apply a single operation. Apps launched through `Op::Launch` get a
    /// default profile unless one was registered beforehand.
    pub fn apply(&mut self, op: &Op) -> Result<(), SemanticsError> {
        match op {
            Op::Launch { device, app } => {
                let profile = self.profiles.get(app).cloned().unwrap_or_default();
                self.launch_app(device, app.clone(), profile)
            }
            Op::Close { device, app } => self.close_app(device, app).map(drop),
            Op::RequestFocus { device, app, usage } => {
                self.request_focus(device, app, *usage).map(drop)
            }
            Op::ReleaseFocus {
                device,
                app,
                status,
            } => self.release_focus(device, app, *status).map(drop),
            Op::StartHop {
                source,
                app,
                target,
            } => self.start_hop(source, app, target).map(drop),
            Op::EndHop => self.end_hop().map(drop),
        }
    }

    /// Run `ops` in order, recording one trace record per operation. Failed
    /// operations leave the state untouched and are recorded with their error.
    pub fn run(&mut self, ops: &[Op]) -> Vec<TraceRecord> {
        ops.iter()
            .enumerate()
            .map(|(step, op)| {
                let error = self.apply(op).err().map(|e| e.to_string());
                TraceRecord {
                    step,
                    op: op.clone(),
                    error,
                    observation: self.snapshot(),
                }
            })
            .collect()
    }

    pub fn snapshot(&self) -> Observation {
        Observation {
            devices: self
                .devices
                .iter()
                .map(|d| DeviceObservation {
                    device: d.device.clone(),
                    apps: d
                        .stack
                        .iter()
                        .map(|a| ObservedApp {
                            app: a.app.clone(),
                            window: None,
                            usage: a.usage,
                            status: a.status,
                            sink: a.sink.clone(),
                        })
                        .collect(),
                })
                .collect(),
            hop: self.hop.clone(),
        }
    }
}

impl fmt::Display for SuperDevice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.snapshot().fmt(f)
    }
}

/// What an executor can observe: per device, the ordered stack contents.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observation {
    pub devices: Vec<DeviceObservation>,
    pub hop: Option<Hop>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviceObservation {
    pub device: DeviceId,
    pub apps: Vec<ObservedApp>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservedApp {
    pub app: AppId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<WindowId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub usage: Option<StreamUsage>,
    pub status: AudioStatus,
    pub sink: DeviceId,
}

impl Observation {
    pub fn is_empty(&self) -> bool {
        self.devices.iter().all(|d| d.apps.is_empty())
    }

    /// Hosting device and observed record of `app`.
    pub fn find(&self, app: &AppId) -> Option<(&DeviceId, &ObservedApp)> {
        self.devices
            .iter()
            .find_map(|d| d.apps.iter().find(|a| &a.app == app).map(|a| (&d.device, a)))
    }

    pub fn device(&self, id: &DeviceId) -> Option<&DeviceObservation> {
        self.devices.iter().find(|d| &d.device == id)
    }

    pub fn status_of(&self, app: &AppId) -> Option<AudioStatus> {
        self.find(app).map(|(_, a)| a.status)
    }
}

impl fmt::Display for Observation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.devices.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}=[", d.device)?;
            for (j, a) in d.apps.iter().enumerate() {
                if j > 0 {
                    f.write_str(",")?;
                }
                write!(f, "({},{}", a.app, a.status)?;
                if a.sink != d.device {
                    write!(f, ",sink={}", a.sink)?;
                }
                f.write_str(")")?;
            }
            f.write_str("]")?;
        }
        match &self.hop {
            Some(h) => write!(f, " hop=({},{},{})", h.source, h.app, h.target),
            None => f.write_str(" hop=none"),
        }
    }
}

/// One line of an execution trace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: usize,
    pub op: Op,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub observation: Observation,
}
