//! Deterministic simulator of app hopping across a multi-device "super
//! device", with a model-based pipeline for finding audio-stream conflicts
//! introduced by hops.

pub mod app;
pub mod astg;
pub mod audio;
pub mod campaign;
pub mod corpus;
pub mod env;
pub mod explore;
pub mod fixtures;
pub mod ids;
pub mod policy;
pub mod scenario;
pub mod superdevice;
pub mod synth;
pub mod walkthrough;

pub use app::AppSpec;
pub use astg::{Ass, Astg, EventDescriptor};
pub use audio::{AudioStatus, ResolutionMatrix, StreamUsage};
pub use ids::{AppId, DeviceId, ElementId, WindowId};
pub use superdevice::{Observation, Op, SuperDevice};
