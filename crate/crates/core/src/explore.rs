//! Graph construction: policy-driven exploration towards playback of each
//! usage, then enhancement with conflict-only states elicited by
//! collaborating apps.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracing::{debug, warn};

use crate::app::AppSpec;
use crate::astg::{Ass, Astg, EventDescriptor, GraphError};
use crate::audio::{AudioStatus, ResolutionMatrix, StreamUsage};
use crate::env::{EnvError, Registry, Sandbox};
use crate::ids::{AppId, DeviceId};
use crate::policy::{
    AppMeta, ElementView, ExplorationPolicy, NextEventQuery, NumberedElement, PolicyError,
    VerifyQuery, WindowView,
};

pub const DEFAULT_MAX_STEPS: usize = 50;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExploreError {
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("replaying the path to {expected} ended in {actual}")]
    Diverged { expected: Ass, actual: Ass },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "warning", rename_all = "snake_case")]
pub enum ExploreWarning {
    BudgetExhausted { usage: StreamUsage, steps: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Exploration {
    pub graph: Astg,
    pub warnings: Vec<ExploreWarning>,
}

fn numbered(env: &Sandbox, app: &AppId, descriptions: Vec<String>) -> Vec<NumberedElement> {
    let rt = env.runtime(app).expect("explored app is running");
    rt.window()
        .elements
        .iter()
        .zip(descriptions)
        .enumerate()
        .map(|(i, (e, d))| NumberedElement {
            index: i + 1,
            id: e.id.clone(),
            description: d,
        })
        .collect()
}

fn window_view(env: &Sandbox, app: &AppId) -> WindowView {
    let rt = env.runtime(app).expect("explored app is running");
    let w = rt.window();
    WindowView {
        app: app.clone(),
        window: w.fingerprint(),
        elements: w
            .elements
            .iter()
            .map(|e| ElementView {
                id: e.id.clone(),
                metadata: e.description.clone(),
            })
            .collect(),
    }
}

fn describe(
    env: &Sandbox,
    app: &AppId,
    policy: &mut dyn ExplorationPolicy,
) -> Result<Vec<NumberedElement>, PolicyError> {
    let descriptions = policy.understand_win(&window_view(env, app))?;
    Ok(numbered(env, app, descriptions))
}

/// Explore `spec` inside `env`, launching it on `device` first if needed.
/// Each usage starts from a freshly restarted app.
pub fn explore(
    spec: &AppSpec,
    policy: &mut dyn ExplorationPolicy,
    env: &mut Sandbox,
    device: &DeviceId,
    max_steps: usize,
) -> Result<Exploration, ExploreError> {
    let app = &spec.id;
    if env.runtime(app).is_none() {
        env.launch(device, app)?;
    }
    let mut graph = Astg::new(app.clone(), env.ass(app)?);
    let mut warnings = Vec::new();

    for usage in policy.understand_app(&AppMeta::of(spec))? {
        env.restart(app)?;
        let mut feedback = None;
        let mut steps = 0;
        loop {
            if steps == max_steps {
                warn!(%app, %usage, steps, "exploration budget exhausted");
                warnings.push(ExploreWarning::BudgetExhausted { usage, steps });
                break;
            }
            steps += 1;
            let before = env.ass(app)?;
            let elements = describe(env, app, policy)?;
            let event = policy.next_event(&NextEventQuery {
                app,
                usage,
                window: &before.window,
                elements: &elements,
                graph: &graph,
                feedback: feedback.as_ref(),
            })?;
            if let Some(e) = event.element() {
                if !elements.iter().any(|n| &n.id == e) {
                    return Err(PolicyError::UnknownElement { element: e.clone() }.into());
                }
            }
            env.fire(app, &event)?;
            let after = env.ass(app)?;
            debug!(%app, %usage, %before, %event, %after, "explored");
            graph.add(before.clone(), event.clone(), after.clone());

            let elements_after = describe(env, app, policy)?;
            let usage_after = env
                .superdevice()
                .instance(app)
                .and_then(|(_, i)| i.usage);
            let fb = policy.verify(&VerifyQuery {
                app,
                usage,
                event: &event,
                window_before: &before.window,
                window_after: &after.window,
                elements_before: &elements,
                elements_after: &elements_after,
                status_after: after.status,
                usage_after,
            })?;
            if !fb.validity {
                env.restart(app)?;
            }
            if fb.terminated {
                break;
            }
            feedback = Some(fb);
        }
    }
    Ok(Exploration { graph, warnings })
}

/// Explore `spec` in a fresh single-device sandbox.
pub fn explore_fresh(
    spec: &Arc<AppSpec>,
    policy: &mut dyn ExplorationPolicy,
    max_steps: usize,
) -> Result<Exploration, ExploreError> {
    let registry = Arc::new(Registry::from([(spec.id.clone(), spec.clone())]));
    let mut env = Sandbox::new(["d1"], registry, ResolutionMatrix::default(), 0);
    explore(spec, policy, &mut env, &DeviceId::from("d1"), max_steps)
}

/// Drive a freshly launched `app` along `path` and check it lands on `target`.
pub fn drive_to(
    env: &mut Sandbox,
    device: &DeviceId,
    app: &AppId,
    path: &[EventDescriptor],
    target: &Ass,
) -> Result<(), ExploreError> {
    env.launch(device, app)?;
    for ev in path {
        env.fire(app, ev)?;
    }
    let actual = env.ass(app)?;
    if &actual != target {
        return Err(ExploreError::Diverged {
            expected: target.clone(),
            actual,
        });
    }
    Ok(())
}

/// The pseudo-event that brings `collaborator` into playback.
pub fn launch_event(collaborator: &AppSpec) -> EventDescriptor {
    EventDescriptor::LaunchCollaborator {
        app: collaborator.id.clone(),
        script: collaborator
            .primary_script()
            .map(|(_, s)| s)
            .unwrap_or_default(),
    }
}

/// For every PLAY state of `graph`, start each collaborator next to the app
/// and record the state it is pushed into when that state is new.
pub fn enhance(
    graph: &Astg,
    spec: &Arc<AppSpec>,
    collaborators: &[Arc<AppSpec>],
    matrix: &ResolutionMatrix,
) -> Result<Astg, ExploreError> {
    let mut registry: Registry = BTreeMap::new();
    registry.insert(spec.id.clone(), spec.clone());
    for c in collaborators {
        registry.insert(c.id.clone(), c.clone());
    }
    let registry = Arc::new(registry);
    let device = DeviceId::from("d1");

    let mut out = graph.clone();
    for state in graph.states_with(AudioStatus::Play) {
        let path = graph.path_to(&state)?;
        for c in collaborators.iter().filter(|c| c.id != spec.id) {
            let mut env = Sandbox::new([device.clone()], registry.clone(), matrix.clone(), 0);
            drive_to(&mut env, &device, &spec.id, &path, &state)?;
            let event = launch_event(c);
            env.fire(&spec.id, &event)?;
            let reached = env.ass(&spec.id)?;
            if !out.contains(&reached) {
                debug!(app = %spec.id, collaborator = %c.id, %state, %reached, "new state");
                out.add(state.clone(), event, reached);
            }
        }
    }
    Ok(out)
}
