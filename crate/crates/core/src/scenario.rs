//! Scenario files: an initial super-device configuration plus an operation list.
//!
//! ```toml
//! seed = 7
//!
//! [[devices]]
//! id = "d1"
//! apps = [
//!     { app = "a1", usage = "NAVIG", status = "PLAY" },
//!     { app = "a2", usage = "MOVIE", status = "DUCK" },
//! ]
//!
//! [[ops]]
//! op = "start_hop"
//! source = "d1"
//! app = "a1"
//! target = "d2"
//! ```
//!
//! Stacks are listed front first and taken verbatim (no arbitration).

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audio::{AudioStatus, ResolutionMatrix, StreamUsage};
use crate::ids::{AppId, DeviceId};
use crate::superdevice::{AppInst, AppProfile, AppStack, Op, SemanticsError, SuperDevice, TraceRecord};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario does not parse: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("scenario is inconsistent: {0}")]
    Semantics(#[from] SemanticsError),
    #[error("profile given for app {0} which is on no device")]
    OrphanProfile(AppId),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<ResolutionMatrix>,
    #[serde(default)]
    pub devices: Vec<DeviceEntry>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub profiles: BTreeMap<AppId, AppProfile>,
    #[serde(default)]
    pub ops: Vec<Op>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceEntry {
    pub id: DeviceId,
    #[serde(default)]
    pub apps: Vec<AppEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AppEntry {
    pub app: AppId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub usage: Option<StreamUsage>,
    #[serde(default = "stopped")]
    pub status: AudioStatus,
    /// Defaults to the device the entry is listed under.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sink: Option<DeviceId>,
}

fn stopped() -> AudioStatus {
    AudioStatus::Stop
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        Ok(toml::from_str(text)?)
    }

    /// Build the initial super device described by the file.
    pub fn build(&self) -> Result<SuperDevice, ScenarioError> {
        let mut sd = SuperDevice::new(Vec::<DeviceId>::new(), self.matrix.clone().unwrap_or_default(), self.seed)?;
        for d in &self.devices {
            let insts = d
                .apps
                .iter()
                .map(|a| AppInst {
                    app: a.app.clone(),
                    usage: a.usage,
                    status: a.status,
                    sink: a.sink.clone().unwrap_or_else(|| d.id.clone()),
                })
                .collect();
            sd.add_device(d.id.clone(), AppStack::from_instances(insts)?)?;
        }
        for (app, profile) in &self.profiles {
            if sd.locate(app).is_none() {
                return Err(ScenarioError::OrphanProfile(app.clone()));
            }
            sd.set_profile(app.clone(), profile.clone());
        }
        Ok(sd)
    }

    /// Build the initial state and run every listed operation.
    pub fn run(&self) -> Result<(SuperDevice, Vec<TraceRecord>), ScenarioError> {
        let mut sd = self.build()?;
        let trace = sd.run(&self.ops);
        Ok((sd, trace))
    }
}

/// Write a trace as JSON lines.
pub fn write_trace(out: &mut dyn Write, trace: &[TraceRecord]) -> std::io::Result<()> {
    for rec in trace {
        serde_json::to_writer(&mut *out, rec)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
