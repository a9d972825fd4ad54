//! End-to-end hopping conflict campaign: model every app, generate hop
//! tests against every collaborator, execute them and compare against
//! single-device baselines.

pub mod baseline;
pub mod detect;
pub mod execute;
pub mod generate;
pub mod report;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracing::info;

use crate::app::AppSpec;
use crate::astg::Astg;
use crate::audio::ResolutionMatrix;
use crate::corpus::CorpusError;
use crate::env::Registry;
use crate::explore::{enhance, explore_fresh, ExploreError, ExploreWarning, DEFAULT_MAX_STEPS};
use crate::fixtures::representatives;
use crate::ids::{AppId, DeviceId};
use crate::policy::ExplorationPolicy;

pub use baseline::{compute_baseline, Baseline, BaselineEntry, StatusPair};
pub use detect::{detect, DedupeKey, Issue, IssueKind, MorSubtype, RoleOrder};
pub use execute::{execute_once, execute_test, repetition_seed};
pub use generate::{gen_all, gen_end_hop, gen_start_hop, Step, TestCase, TestKind};
pub use report::{report, CampaignReport, Counts};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CampaignError {
    #[error("modelling {app} failed: {source}")]
    Explore {
        app: AppId,
        #[source]
        source: ExploreError,
    },
    #[error("test {test} does not replay: {reason}")]
    Replay { test: String, reason: String },
    #[error("no baseline for test {test} (windows {tested_window} / {collab_window})")]
    MissingBaseline {
        test: String,
        tested_window: String,
        collab_window: String,
    },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("bad campaign configuration: {0}")]
    Config(String),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Collaborators {
    /// Every other app of the corpus.
    #[default]
    AllOthers,
    Only(Vec<AppId>),
}

fn default_devices() -> [DeviceId; 2] {
    [DeviceId::from("phone"), DeviceId::from("tablet")]
}

fn one() -> usize {
    1
}

fn default_steps() -> usize {
    DEFAULT_MAX_STEPS
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus: Option<PathBuf>,
    #[serde(default = "default_devices")]
    pub devices: [DeviceId; 2],
    #[serde(default = "one")]
    pub repetitions: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub collaborators: Collaborators,
    #[serde(default = "default_steps")]
    pub max_steps: usize,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            corpus: None,
            devices: default_devices(),
            repetitions: 1,
            seed: 0,
            collaborators: Collaborators::AllOthers,
            max_steps: DEFAULT_MAX_STEPS,
        }
    }
}

impl CampaignConfig {
    pub fn parse(text: &str) -> Result<Self, CampaignError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CampaignError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CampaignError> {
        if self.repetitions == 0 {
            return Err(CampaignError::Config("repetitions must be positive".into()));
        }
        if self.devices[0] == self.devices[1] {
            return Err(CampaignError::Config("the two devices must differ".into()));
        }
        Ok(())
    }
}

/// Enhanced graphs of a set of apps.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Models {
    pub graphs: BTreeMap<AppId, Astg>,
    pub warnings: BTreeMap<AppId, Vec<ExploreWarning>>,
}

/// Corpus apps plus the built-in collaborators.
pub fn registry_for(apps: &[Arc<AppSpec>]) -> Arc<Registry> {
    let mut reg: Registry = representatives().into_iter().map(|r| (r.id.clone(), r)).collect();
    for a in apps {
        reg.insert(a.id.clone(), a.clone());
    }
    Arc::new(reg)
}

/// Explore every app with `policy`, one at a time, then enhance all graphs
/// in parallel with the built-in collaborators.
pub fn build_models(
    apps: &[Arc<AppSpec>],
    policy: &mut dyn ExplorationPolicy,
    max_steps: usize,
    matrix: &ResolutionMatrix,
) -> Result<Models, CampaignError> {
    let mut explored = Vec::with_capacity(apps.len());
    let mut warnings = BTreeMap::new();
    for spec in apps {
        let e = explore_fresh(spec, policy, max_steps).map_err(|source| CampaignError::Explore {
            app: spec.id.clone(),
            source,
        })?;
        if !e.warnings.is_empty() {
            warnings.insert(spec.id.clone(), e.warnings);
        }
        explored.push((spec.clone(), e.graph));
    }
    let reps = representatives();
    let graphs = explored
        .par_iter()
        .map(|(spec, g)| {
            enhance(g, spec, &reps, matrix)
                .map(|g| (spec.id.clone(), g))
                .map_err(|source| CampaignError::Explore {
                    app: spec.id.clone(),
                    source,
                })
        })
        .collect::<Result<BTreeMap<_, _>, _>>()?;
    Ok(Models { graphs, warnings })
}

/// Test cases for every tested app against its collaborators.
pub fn generate_tests(models: &Models, cfg: &CampaignConfig) -> Result<Vec<TestCase>, CampaignError> {
    let [d1, d2] = &cfg.devices;
    let mut out = Vec::new();
    for (app, g) in &models.graphs {
        let collabs: Vec<&Astg> = match &cfg.collaborators {
            Collaborators::AllOthers => models.graphs.values().filter(|c| &c.app != app).collect(),
            Collaborators::Only(ids) => ids
                .iter()
                .filter(|id| *id != app)
                .map(|id| {
                    models.graphs.get(id).ok_or_else(|| {
                        CampaignError::Config(format!("collaborator {id} is not in the corpus"))
                    })
                })
                .collect::<Result<_, _>>()?,
        };
        let cases = gen_all(g, &collabs, d1, d2).map_err(|e| CampaignError::Explore {
            app: app.clone(),
            source: e.into(),
        })?;
        out.extend(cases);
    }
    Ok(out)
}

/// Baselines for every (tested, collaborator) pair that has test cases.
pub fn compute_baselines(
    models: &Models,
    tests: &[TestCase],
    registry: &Arc<Registry>,
    matrix: &ResolutionMatrix,
) -> Result<BTreeMap<(AppId, AppId), Baseline>, CampaignError> {
    let mut pairs: Vec<(AppId, AppId)> = tests
        .iter()
        .map(|t| (t.tested_app.clone(), t.collaborator.clone()))
        .collect();
    pairs.sort();
    pairs.dedup();
    pairs
        .par_iter()
        .map(|(t, c)| {
            compute_baseline(&models.graphs[t], &models.graphs[c], registry, matrix)
                .map(|b| ((t.clone(), c.clone()), b))
                .map_err(|source| CampaignError::Explore {
                    app: t.clone(),
                    source,
                })
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct CampaignOutcome {
    pub models: Models,
    pub tests: Vec<TestCase>,
    pub issues: Vec<Issue>,
    pub report: CampaignReport,
}

/// Execute and check every test, in parallel; issues come back in test order.
pub fn execute_and_detect(
    tests: &[TestCase],
    baselines: &BTreeMap<(AppId, AppId), Baseline>,
    registry: &Arc<Registry>,
    matrix: &ResolutionMatrix,
    repetitions: usize,
    seed: u64,
) -> Result<Vec<Issue>, CampaignError> {
    let per_test = tests
        .par_iter()
        .map(|tc| {
            let obs = execute_test(tc, registry, matrix, repetitions, seed)?;
            let key = (tc.tested_app.clone(), tc.collaborator.clone());
            let baseline = baselines.get(&key).ok_or_else(|| CampaignError::MissingBaseline {
                test: tc.id.clone(),
                tested_window: tc.target_state.window.clone(),
                collab_window: tc.collab_state.window.clone(),
            })?;
            detect(tc, &obs, baseline)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(per_test.into_iter().flatten().collect())
}

pub fn run_campaign(
    apps: &[Arc<AppSpec>],
    policy: &mut dyn ExplorationPolicy,
    cfg: &CampaignConfig,
) -> Result<CampaignOutcome, CampaignError> {
    cfg.validate()?;
    let matrix = ResolutionMatrix::default();
    let registry = registry_for(apps);
    let models = build_models(apps, policy, cfg.max_steps, &matrix)?;
    let tests = generate_tests(&models, cfg)?;
    info!(apps = apps.len(), tests = tests.len(), "generated test cases");
    let baselines = compute_baselines(&models, &tests, &registry, &matrix)?;
    let issues = execute_and_detect(&tests, &baselines, &registry, &matrix, cfg.repetitions, cfg.seed)?;
    let mut rep = report(&issues);
    rep.test_cases = tests.len();
    rep.executions = tests.len() * cfg.repetitions;
    info!(issues = rep.total, unique = rep.unique, "campaign finished");
    Ok(CampaignOutcome {
        models,
        tests,
        issues,
        report: rep,
    })
}
