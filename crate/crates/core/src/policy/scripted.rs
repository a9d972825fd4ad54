//! Deterministic policy driven by per-app hints.

use std::collections::BTreeMap;

use crate::app::AppSpec;
use crate::astg::{EventDescriptor, Feedback};
use crate::audio::{AudioStatus, StreamUsage};
use crate::ids::{AppId, ElementId};

use super::{AppMeta, ExplorationPolicy, NextEventQuery, PolicyError, VerifyQuery, WindowView};

/// Usages of an app and, per usage, the clicks that start it.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Hint {
    pub usages: Vec<StreamUsage>,
    pub paths: BTreeMap<StreamUsage, Vec<ElementId>>,
}

impl Hint {
    pub fn of(spec: &AppSpec) -> Self {
        let usages: Vec<StreamUsage> = spec.usages.iter().copied().collect();
        let paths = usages
            .iter()
            .filter_map(|u| spec.play_script(*u).map(|p| (*u, p)))
            .collect();
        Self { usages, paths }
    }

    fn path(&self, usage: StreamUsage) -> &[ElementId] {
        self.paths.get(&usage).map(Vec::as_slice).unwrap_or_default()
    }
}

/// Answers every query from its hints and the query itself; it keeps no
/// state between calls.
#[derive(Clone, Debug, Default)]
pub struct ScriptedPolicy {
    hints: BTreeMap<AppId, Hint>,
}

impl ScriptedPolicy {
    pub fn new(hints: BTreeMap<AppId, Hint>) -> Self {
        Self { hints }
    }

    pub fn from_specs<'a>(specs: impl IntoIterator<Item = &'a AppSpec>) -> Self {
        Self::new(specs.into_iter().map(|s| (s.id.clone(), Hint::of(s))).collect())
    }

    fn hint(&self, app: &AppId) -> Result<&Hint, PolicyError> {
        self.hints
            .get(app)
            .ok_or_else(|| PolicyError::MissingHint(app.clone()))
    }
}

impl ExplorationPolicy for ScriptedPolicy {
    fn understand_app(&mut self, app: &AppMeta) -> Result<Vec<StreamUsage>, PolicyError> {
        Ok(self.hint(&app.id)?.usages.clone())
    }

    fn understand_win(&mut self, window: &WindowView) -> Result<Vec<String>, PolicyError> {
        self.hint(&window.app)?;
        Ok(window.elements.iter().map(|e| e.metadata.clone()).collect())
    }

    fn next_event(&mut self, q: &NextEventQuery<'_>) -> Result<EventDescriptor, PolicyError> {
        let path = self.hint(q.app)?.path(q.usage);
        // furthest hinted step available in this window
        if let Some(e) = path
            .iter()
            .rev()
            .find(|e| q.elements.iter().any(|n| &n.id == *e))
        {
            return Ok(EventDescriptor::click(e.clone()));
        }
        let tried = |id: &ElementId| {
            q.graph
                .transitions
                .iter()
                .any(|t| t.from.window == q.window && t.event.element() == Some(id))
        };
        q.elements
            .iter()
            .find(|n| !tried(&n.id))
            .or_else(|| q.elements.first())
            .map(|n| EventDescriptor::click(n.id.clone()))
            .ok_or_else(|| PolicyError::NoElements(q.window.to_string()))
    }

    fn verify(&mut self, q: &VerifyQuery<'_>) -> Result<Feedback, PolicyError> {
        let path = self.hint(q.app)?.path(q.usage);
        let validity = q.event.element().is_some_and(|e| path.contains(e));
        let terminated = q.status_after == AudioStatus::Play && q.usage_after == Some(q.usage);
        let next = match q.event.element().and_then(|e| path.iter().position(|p| p == e)) {
            Some(i) => path.get(i + 1),
            None => path.first(),
        };
        let suggestion = match next {
            Some(n) if !terminated => format!("Select the \"{n}\" element"),
            _ => String::new(),
        };
        Ok(Feedback {
            validity,
            terminated,
            suggestion,
        })
    }
}
