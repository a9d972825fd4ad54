//! A super device populated with running app runtimes.
//!
//! The sandbox owns the semantic state plus, for every running app, the
//! window it is showing. GUI events are dispatched to the app's element
//! handlers and audio actions are forwarded to the super device.

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::app::{Action, AppSpec};
use crate::astg::{Ass, EventDescriptor};
use crate::audio::{AudioStatus, ResolutionMatrix};
use crate::ids::{AppId, DeviceId, ElementId, WindowId};
use crate::superdevice::{HopEffect, Observation, SemanticsError, SuperDevice};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnvError {
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error("app {0} is not registered with the sandbox")]
    UnknownApp(AppId),
    #[error("app {0} is not running")]
    NotRunning(AppId),
    #[error("window {window} of app {app} has no element {element}")]
    NoSuchElement {
        app: AppId,
        window: WindowId,
        element: ElementId,
    },
}

/// Live state of one running app.
#[derive(Clone, Debug, PartialEq)]
pub struct AppRuntime {
    pub spec: Arc<AppSpec>,
    pub current_window: WindowId,
}

impl AppRuntime {
    pub fn window(&self) -> &crate::app::WindowSpec {
        self.spec
            .window(&self.current_window)
            .expect("runtime window belongs to its spec")
    }
}

/// Known app specs, keyed by id.
pub type Registry = BTreeMap<AppId, Arc<AppSpec>>;

#[derive(Clone, Debug)]
pub struct Sandbox {
    sd: SuperDevice,
    registry: Arc<Registry>,
    runtimes: BTreeMap<AppId, AppRuntime>,
}

impl Sandbox {
    pub fn new<D: Into<DeviceId>>(
        devices: impl IntoIterator<Item = D>,
        registry: Arc<Registry>,
        matrix: ResolutionMatrix,
        seed: u64,
    ) -> Self {
        let sd = SuperDevice::new(devices, matrix, seed).expect("device ids are distinct");
        Self {
            sd,
            registry,
            runtimes: BTreeMap::new(),
        }
    }

    pub fn superdevice(&self) -> &SuperDevice {
        &self.sd
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    pub fn runtime(&self, app: &AppId) -> Option<&AppRuntime> {
        self.runtimes.get(app)
    }

    pub fn host(&self, app: &AppId) -> Result<DeviceId, EnvError> {
        self.sd
            .locate(app)
            .cloned()
            .ok_or_else(|| EnvError::NotRunning(app.clone()))
    }

    fn spec(&self, app: &AppId) -> Result<Arc<AppSpec>, EnvError> {
        self.registry
            .get(app)
            .cloned()
            .ok_or_else(|| EnvError::UnknownApp(app.clone()))
    }

    /// Start `app` on `device` at its initial window, silent.
    pub fn launch(&mut self, device: &DeviceId, app: &AppId) -> Result<(), EnvError> {
        let spec = self.spec(app)?;
        self.sd.launch_app(device, app.clone(), spec.profile())?;
        self.runtimes.insert(
            app.clone(),
            AppRuntime {
                current_window: spec.initial_window.clone(),
                spec,
            },
        );
        Ok(())
    }

    pub fn close(&mut self, app: &AppId) -> Result<(), EnvError> {
        let host = self.host(app)?;
        self.sd.close_app(&host, app)?;
        self.runtimes.remove(app);
        Ok(())
    }

    /// Close and relaunch `app` on the same device. The remaining apps on
    /// that device are re-resolved as if it had never played.
    pub fn restart(&mut self, app: &AppId) -> Result<(), EnvError> {
        let host = self.host(app)?;
        self.close(app)?;
        self.launch(&host, app)
    }

    /// Dispatch a GUI (or pseudo) event to `app`.
    pub fn fire(&mut self, app: &AppId, event: &EventDescriptor) -> Result<(), EnvError> {
        match event {
            EventDescriptor::Click { element } | EventDescriptor::Input { element, .. } => {
                self.click(app, element)
            }
            EventDescriptor::LaunchCollaborator { app: other, script } => {
                let host = self.host(app)?;
                self.launch(&host, other)?;
                for element in script {
                    self.click(other, element)?;
                }
                Ok(())
            }
        }
    }

    fn click(&mut self, app: &AppId, element: &ElementId) -> Result<(), EnvError> {
        let rt = self
            .runtimes
            .get(app)
            .ok_or_else(|| EnvError::NotRunning(app.clone()))?;
        let action = rt
            .window()
            .element(element)
            .ok_or_else(|| EnvError::NoSuchElement {
                app: app.clone(),
                window: rt.current_window.clone(),
                element: element.clone(),
            })?
            .action
            .clone();
        let host = self.host(app)?;
        match action {
            Action::Navigate(w) => {
                self.runtimes
                    .get_mut(app)
                    .expect("checked above")
                    .current_window = w;
            }
            Action::Play(usage) => {
                self.sd.request_focus(&host, app, usage)?;
            }
            Action::Pause => {
                self.sd.release_focus(&host, app, AudioStatus::Pause)?;
            }
            Action::Stop => {
                self.sd.release_focus(&host, app, AudioStatus::Stop)?;
            }
            Action::Inert => {}
        }
        Ok(())
    }

    /// Click through `script` in order.
    pub fn run_script(&mut self, app: &AppId, script: &[ElementId]) -> Result<(), EnvError> {
        for e in script {
            self.click(app, e)?;
        }
        Ok(())
    }

    /// The app's current audio-stream-aware state.
    pub fn ass(&self, app: &AppId) -> Result<Ass, EnvError> {
        let rt = self
            .runtimes
            .get(app)
            .ok_or_else(|| EnvError::NotRunning(app.clone()))?;
        let (_, inst) = self
            .sd
            .instance(app)
            .ok_or_else(|| EnvError::NotRunning(app.clone()))?;
        Ok(Ass {
            window: rt.window().fingerprint(),
            status: inst.status,
        })
    }

    pub fn start_hop(
        &mut self,
        source: &DeviceId,
        app: &AppId,
        target: &DeviceId,
    ) -> Result<HopEffect, EnvError> {
        Ok(self.sd.start_hop(source, app, target)?)
    }

    pub fn end_hop(&mut self) -> Result<HopEffect, EnvError> {
        Ok(self.sd.end_hop()?)
    }

    /// Semantic snapshot with window fingerprints filled in.
    pub fn snapshot(&self) -> Observation {
        let mut obs = self.sd.snapshot();
        for d in &mut obs.devices {
            for a in &mut d.apps {
                a.window = self
                    .runtimes
                    .get(&a.app)
                    .map(|rt| WindowId::new(rt.window().fingerprint()));
            }
        }
        obs
    }
}
