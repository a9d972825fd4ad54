//! Exploration policies: the decision procedure behind graph exploration.

mod llm;
mod scripted;

pub use llm::{ChatEndpointConfig, LlmPolicy};
pub use scripted::{Hint, ScriptedPolicy};

use thiserror::Error;

use crate::app::{AppSpec, Category};
use crate::astg::{Astg, EventDescriptor, Feedback};
use crate::audio::{AudioStatus, StreamUsage};
use crate::ids::{AppId, ElementId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolicyError {
    #[error("no hint for app {0}")]
    MissingHint(AppId),
    #[error("policy endpoint unavailable: {0}")]
    EndpointUnavailable(String),
    #[error("malformed policy reply after {attempts} attempt(s): {reason}")]
    MalformedReply { attempts: usize, reason: String },
    #[error("credential variable {0} is not set")]
    MissingCredential(String),
    #[error("window {0} offers no element to act on")]
    NoElements(String),
    #[error("policy chose element {element} which is not in the current window")]
    UnknownElement { element: ElementId },
}

/// What a policy may know about an app before exploring it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AppMeta {
    pub id: AppId,
    pub category: Category,
    pub element_descriptions: Vec<String>,
}

impl AppMeta {
    pub fn of(spec: &AppSpec) -> Self {
        Self {
            id: spec.id.clone(),
            category: spec.category,
            element_descriptions: spec
                .windows
                .iter()
                .flat_map(|w| w.elements.iter().map(|e| e.description.clone()))
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElementView {
    pub id: ElementId,
    /// Raw element metadata, standing in for the element's image.
    pub metadata: String,
}

/// The current window as handed to [`ExplorationPolicy::understand_win`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindowView {
    pub app: AppId,
    pub window: String,
    pub elements: Vec<ElementView>,
}

/// An element as presented for event selection. Indices start at 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NumberedElement {
    pub index: usize,
    pub id: ElementId,
    pub description: String,
}

pub struct NextEventQuery<'a> {
    pub app: &'a AppId,
    pub usage: StreamUsage,
    pub window: &'a str,
    pub elements: &'a [NumberedElement],
    pub graph: &'a Astg,
    pub feedback: Option<&'a Feedback>,
}

pub struct VerifyQuery<'a> {
    pub app: &'a AppId,
    pub usage: StreamUsage,
    pub event: &'a EventDescriptor,
    pub window_before: &'a str,
    pub window_after: &'a str,
    pub elements_before: &'a [NumberedElement],
    pub elements_after: &'a [NumberedElement],
    pub status_after: AudioStatus,
    pub usage_after: Option<StreamUsage>,
}

pub trait ExplorationPolicy {
    fn understand_app(&mut self, app: &AppMeta) -> Result<Vec<StreamUsage>, PolicyError>;
    fn understand_win(&mut self, window: &WindowView) -> Result<Vec<String>, PolicyError>;
    fn next_event(&mut self, q: &NextEventQuery<'_>) -> Result<EventDescriptor, PolicyError>;
    fn verify(&mut self, q: &VerifyQuery<'_>) -> Result<Feedback, PolicyError>;
}
