//! Bundled app specs: desk-scale fixtures and the default collaborators
//! used to elicit conflict-only statuses.

use std::sync::Arc;

use crate::app::{single_play_app, AppSpec, Category};
use crate::audio::StreamUsage;

pub const TUNEBOX: &str = include_str!("../fixtures/tunebox.toml");
pub const WAYPOINT: &str = include_str!("../fixtures/waypoint.toml");
pub const STORYREEL: &str = include_str!("../fixtures/storyreel.toml");

/// Id prefix reserved for the built-in collaborators.
pub const REP_PREFIX: &str = "rep-";

fn load(text: &str) -> Arc<AppSpec> {
    Arc::new(AppSpec::parse(text).expect("bundled fixture is valid"))
}

/// Music player with MUSIC and MOVIE streams behind different windows.
pub fn music_fixture() -> Arc<AppSpec> {
    load(TUNEBOX)
}

/// Navigation app whose guidance needs three clicks to start and which
/// pauses (rather than stops) for calls.
pub fn navigation_fixture() -> Arc<AppSpec> {
    load(WAYPOINT)
}

/// One window, one play button.
pub fn single_play_fixture() -> Arc<AppSpec> {
    load(STORYREEL)
}

/// One single-element player per stream usage.
pub fn representatives() -> Vec<Arc<AppSpec>> {
    Category::ALL
        .iter()
        .map(|c| {
            let u = c.typical_usage();
            let id = format!("{REP_PREFIX}{}", u.as_str().to_ascii_lowercase());
            Arc::new(single_play_app(&id, *c, u))
        })
        .collect()
}

pub fn representative(usage: StreamUsage) -> Arc<AppSpec> {
    representatives()
        .into_iter()
        .find(|r| r.usages.contains(&usage))
        .expect("one representative per usage")
}
