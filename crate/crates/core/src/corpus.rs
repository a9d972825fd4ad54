//! Corpus directories: a `manifest.toml` listing app ids plus one
//! `<id>.toml` spec per app.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::app::{AppSpec, SpecError};
use crate::fixtures::REP_PREFIX;
use crate::ids::AppId;

pub const MANIFEST: &str = "manifest.toml";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error("{path}: {reason}")]
    Io { path: PathBuf, reason: String },
    #[error("{path}: manifest does not parse: {reason}")]
    Manifest { path: PathBuf, reason: String },
    #[error("{path}: {source}")]
    Spec {
        path: PathBuf,
        #[source]
        source: SpecError,
    },
    #[error("{path}: file declares app `{found}` but the manifest expects `{expected}`")]
    IdMismatch {
        path: PathBuf,
        expected: AppId,
        found: AppId,
    },
    #[error("app `{0}` is listed twice")]
    Duplicate(AppId),
    #[error("app id `{0}` uses the reserved prefix `{REP_PREFIX}`")]
    Reserved(AppId),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub apps: Vec<AppId>,
}

fn io_err(path: &Path, e: std::io::Error) -> CorpusError {
    CorpusError::Io {
        path: path.to_path_buf(),
        reason: e.to_string(),
    }
}

pub fn read_manifest(dir: &Path) -> Result<Manifest, CorpusError> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
    toml::from_str(&text).map_err(|e| CorpusError::Manifest {
        path,
        reason: e.to_string(),
    })
}

fn load_one(dir: &Path, id: &AppId) -> Result<Arc<AppSpec>, CorpusError> {
    if id.as_str().starts_with(REP_PREFIX) {
        return Err(CorpusError::Reserved(id.clone()));
    }
    let path = dir.join(format!("{id}.toml"));
    let bytes = fs::read(&path).map_err(|e| io_err(&path, e))?;
    let spec = AppSpec::load(&bytes).map_err(|source| CorpusError::Spec {
        path: path.clone(),
        source,
    })?;
    if &spec.id != id {
        return Err(CorpusError::IdMismatch {
            path,
            expected: id.clone(),
            found: spec.id,
        });
    }
    Ok(Arc::new(spec))
}

/// Load every app listed in the manifest, in manifest order.
pub fn load_dir(dir: &Path) -> Result<Vec<Arc<AppSpec>>, CorpusError> {
    let manifest = read_manifest(dir)?;
    let mut seen = BTreeSet::new();
    manifest
        .apps
        .iter()
        .map(|id| {
            if !seen.insert(id) {
                return Err(CorpusError::Duplicate(id.clone()));
            }
            load_one(dir, id)
        })
        .collect()
}

/// Check a corpus and report every problem rather than the first one.
pub fn lint_dir(dir: &Path) -> Result<Vec<CorpusError>, CorpusError> {
    let manifest = read_manifest(dir)?;
    let mut seen = BTreeSet::new();
    let mut problems = Vec::new();
    for id in &manifest.apps {
        if !seen.insert(id) {
            problems.push(CorpusError::Duplicate(id.clone()));
            continue;
        }
        if let Err(e) = load_one(dir, id) {
            problems.push(e);
        }
    }
    Ok(problems)
}

/// Write `apps` and their manifest into `dir`, creating it if needed.
pub fn write_dir(dir: &Path, apps: &[AppSpec]) -> Result<(), CorpusError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    for a in apps {
        let path = dir.join(format!("{}.toml", a.id));
        fs::write(&path, a.save()).map_err(|e| io_err(&path, e))?;
    }
    let manifest = Manifest {
        apps: apps.iter().map(|a| a.id.clone()).collect(),
    };
    let path = dir.join(MANIFEST);
    let text = toml::to_string(&manifest).expect("manifest serializes");
    fs::write(&path, text).map_err(|e| io_err(&path, e))
}
