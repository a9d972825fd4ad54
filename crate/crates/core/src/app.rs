//! Declarative simulated apps: windows, elements, audio actions and the
//! per-app conflict reactions and hop fault profile.
//!
//! Spec files are TOML:
//!
//! ```toml
//! id = "tiny"
//! category = "music"
//! usages = ["MUSIC"]
//! initial_window = "main"
//!
//! [[windows]]
//! id = "main"
//!
//! [[windows.elements]]
//! id = "play"
//! description = "Play button"
//! action = { play = "MUSIC" }
//! ```

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::audio::{ReactionTable, StreamUsage};
use crate::ids::{AppId, ElementId, WindowId};
use crate::superdevice::{AppProfile, HopFault};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("app spec does not parse: {0}")]
    Parse(String),
    #[error("invalid app spec, field `{field}`: {reason}")]
    Validation { field: String, reason: String },
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> SpecError {
    SpecError::Validation {
        field: field.into(),
        reason: reason.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Music,
    Video,
    Navigation,
    Social,
}

impl Category {
    pub const ALL: [Category; 4] = [
        Category::Music,
        Category::Video,
        Category::Navigation,
        Category::Social,
    ];

    /// The stream usage apps of this category most often play.
    pub fn typical_usage(self) -> StreamUsage {
        match self {
            Category::Music => StreamUsage::Music,
            Category::Video => StreamUsage::Movie,
            Category::Navigation => StreamUsage::Navig,
            Category::Social => StreamUsage::Commu,
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Category::Music => "music",
            Category::Video => "video",
            Category::Navigation => "navigation",
            Category::Social => "social",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Navigate(WindowId),
    Play(StreamUsage),
    Pause,
    Stop,
    Inert,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementSpec {
    pub id: ElementId,
    #[serde(default)]
    pub description: String,
    pub action: Action,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    pub id: WindowId,
    #[serde(default)]
    pub elements: Vec<ElementSpec>,
}

impl WindowSpec {
    pub fn element(&self, id: &ElementId) -> Option<&ElementSpec> {
        self.elements.iter().find(|e| &e.id == id)
    }

    /// Stable identity of the window: id plus a digest of its element ids.
    pub fn fingerprint(&self) -> String {
        let mut ids: Vec<&str> = self.elements.iter().map(|e| e.id.as_str()).collect();
        ids.sort_unstable();
        let digest = Sha256::digest(ids.join("\n").as_bytes());
        format!("{}#{}", self.id, &hex::encode(digest)[..8])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AppSpec {
    pub id: AppId,
    pub category: Category,
    #[serde(default)]
    pub usages: BTreeSet<StreamUsage>,
    pub initial_window: WindowId,
    #[serde(default)]
    pub reactions_normal: ReactionTable,
    #[serde(default)]
    pub reactions_hopping: ReactionTable,
    #[serde(default)]
    pub hop_fault: HopFault,
    pub windows: Vec<WindowSpec>,
}

impl AppSpec {
    pub fn load(bytes: &[u8]) -> Result<Self, SpecError> {
        let text = std::str::from_utf8(bytes).map_err(|e| SpecError::Parse(e.to_string()))?;
        Self::parse(text)
    }

    pub fn parse(text: &str) -> Result<Self, SpecError> {
        let spec: AppSpec = toml::from_str(text).map_err(|e| SpecError::Parse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn save(&self) -> String {
        toml::to_string(self).expect("app specs always serialize")
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        if self.id.as_str().is_empty() {
            return Err(invalid("id", "must not be empty"));
        }
        let mut window_ids = BTreeSet::new();
        for w in &self.windows {
            if !window_ids.insert(&w.id) {
                return Err(invalid(format!("windows.{}", w.id), "duplicate window id"));
            }
        }
        if !window_ids.contains(&self.initial_window) {
            return Err(invalid(
                "initial_window",
                format!("window `{}` does not exist", self.initial_window),
            ));
        }
        let mut played = BTreeSet::new();
        for w in &self.windows {
            let mut element_ids = BTreeSet::new();
            for e in &w.elements {
                let field = format!("windows.{}.elements.{}", w.id, e.id);
                if !element_ids.insert(&e.id) {
                    return Err(invalid(field, "duplicate element id in window"));
                }
                match &e.action {
                    Action::Navigate(target) if !window_ids.contains(target) => {
                        return Err(invalid(
                            format!("{field}.action"),
                            format!("navigates to missing window `{target}`"),
                        ));
                    }
                    Action::Play(u) => {
                        if !self.usages.contains(u) {
                            return Err(invalid(
                                format!("{field}.action"),
                                format!("plays {u}, which is not listed in usages"),
                            ));
                        }
                        played.insert(*u);
                    }
                    _ => {}
                }
            }
        }
        if let Some(u) = self.usages.difference(&played).next() {
            return Err(invalid(
                "usages",
                format!("{u} is declared but no element plays it"),
            ));
        }
        let p = self.hop_fault.probability;
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid(
                "hop_fault.probability",
                format!("{p} is outside [0, 1]"),
            ));
        }
        Ok(())
    }

    pub fn window(&self, id: &WindowId) -> Option<&WindowSpec> {
        self.windows.iter().find(|w| &w.id == id)
    }

    pub fn initial(&self) -> &WindowSpec {
        self.window(&self.initial_window)
            .expect("validated spec has its initial window")
    }

    pub fn profile(&self) -> AppProfile {
        AppProfile {
            normal: self.reactions_normal.clone(),
            hopping: self.reactions_hopping.clone(),
            fault: self.hop_fault.clone(),
        }
    }

    /// Shortest click sequence from the initial window to an element that
    /// plays `usage`, following navigation elements in declaration order.
    pub fn play_script(&self, usage: StreamUsage) -> Option<Vec<ElementId>> {
        let mut seen = BTreeSet::from([self.initial_window.clone()]);
        let mut queue = VecDeque::from([(self.initial_window.clone(), Vec::new())]);
        while let Some((wid, path)) = queue.pop_front() {
            let window = self.window(&wid)?;
            for e in &window.elements {
                if e.action == Action::Play(usage) {
                    let mut p: Vec<ElementId> = path.clone();
                    p.push(e.id.clone());
                    return Some(p);
                }
            }
            for e in &window.elements {
                if let Action::Navigate(next) = &e.action {
                    if seen.insert(next.clone()) {
                        let mut p = path.clone();
                        p.push(e.id.clone());
                        queue.push_back((next.clone(), p));
                    }
                }
            }
        }
        None
    }

    /// Script for the usage this app plays first, if any.
    pub fn primary_script(&self) -> Option<(StreamUsage, Vec<ElementId>)> {
        self.usages
            .iter()
            .find_map(|u| self.play_script(*u).map(|s| (*u, s)))
    }
}

/// One-window app whose single element plays `usage`.
pub fn single_play_app(id: &str, category: Category, usage: StreamUsage) -> AppSpec {
    AppSpec {
        id: AppId::from(id),
        category,
        usages: BTreeSet::from([usage]),
        initial_window: WindowId::from("main"),
        reactions_normal: ReactionTable::default(),
        reactions_hopping: ReactionTable::default(),
        hop_fault: HopFault::default(),
        windows: vec![WindowSpec {
            id: WindowId::from("main"),
            elements: vec![ElementSpec {
                id: ElementId::from("play"),
                description: format!("Start {usage} playback"),
                action: Action::Play(usage),
            }],
        }],
    }
}
