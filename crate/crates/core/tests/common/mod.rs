//! Test-side oracles, written independently of the library's resolution code.

#![allow(dead_code)]

pub mod sem;
pub mod stub;

use std::collections::BTreeSet;

use hopsim_core::app::AppSpec;
use hopsim_core::campaign::Issue;
use hopsim_core::synth::{InjectedFault, SyntheticCorpus};
use hopsim_core::StreamUsage;

/// Reference outcome table, rows = earlier stream, columns = later stream,
/// both in MUSIC, MOVIE, NAVIG, COMMU order. Entries are (earlier, later).
const TABLE: [[(&str, &str); 4]; 4] = [
    [("STOP", "PLAY"), ("STOP", "PLAY"), ("DUCK", "PLAY"), ("PAUSE_RESUME", "PLAY")],
    [("STOP", "PLAY"), ("STOP", "PLAY"), ("DUCK", "PLAY"), ("PAUSE_RESUME", "PLAY")],
    [("PLAY", "DUCK"), ("PLAY", "DUCK"), ("STOP", "PLAY"), ("STOP", "PLAY")],
    [("PLAY", "DUCK"), ("PLAY", "DUCK"), ("PLAY", "PLAY"), ("PAUSE_RESUME", "PLAY")],
];

fn idx(u: StreamUsage) -> usize {
    match u.as_str() {
        "MUSIC" => 0,
        "MOVIE" => 1,
        "NAVIG" => 2,
        "COMMU" => 3,
        other => panic!("unexpected usage {other}"),
    }
}

pub fn reference(pre: StreamUsage, post: StreamUsage) -> (&'static str, &'static str) {
    TABLE[idx(pre)][idx(post)]
}

/// (tested app, collaborator usage, tested usage, kind, subtype)
pub type Key = (String, String, String, String, Option<String>);

fn subtype(expected: &str, observed: &str) -> String {
    match (expected, observed) {
        ("DUCK", "PLAY") => "DUCK_TO_PLAY".into(),
        ("DUCK", "STOP") => "DUCK_TO_STOP".into(),
        ("STOP", "PLAY") => "STOP_TO_PLAY".into(),
        _ => panic!("corpus should only produce the three named subtypes, got {expected}->{observed}"),
    }
}

fn hop_override(corpus: &SyntheticCorpus, app: &AppSpec, incoming: StreamUsage) -> Option<&'static str> {
    corpus.injections.iter().find_map(|i| match &i.fault {
        InjectedFault::HopReaction { incoming: u, status } if i.app == app.id && *u == incoming => {
            Some(status.as_str())
        }
        _ => None,
    })
}

fn stuck(corpus: &SyntheticCorpus, app: &AppSpec) -> bool {
    corpus.injections.iter().any(|i| {
        i.app == app.id && matches!(i.fault, InjectedFault::StuckSink { probability } if probability > 0.0)
    })
}

/// Distinct issues a faithful campaign must report over `corpus` when every
/// other app serves as collaborator, derived from the injection manifest.
pub fn expected_keys(corpus: &SyntheticCorpus) -> BTreeSet<Key> {
    let mut out = BTreeSet::new();
    for t in &corpus.apps {
        for c in corpus.apps.iter().filter(|c| c.id != t.id) {
            let uc = corpus.primary_usage[&c.id];
            for &ut in &t.usages {
                let base = reference(uc, ut);
                let cu = uc.as_str().to_string();
                let tu = ut.as_str().to_string();
                if stuck(corpus, t) {
                    out.insert((t.id.to_string(), cu.clone(), tu.clone(), "MOD".into(), None));
                }
                if let Some(hop_pre) = hop_override(corpus, c, ut) {
                    if hop_pre != base.0 {
                        out.insert((t.id.to_string(), cu, tu, "MOR".into(), Some(subtype(base.0, hop_pre))));
                    }
                }
            }
        }
    }
    out
}

pub fn detected_keys(issues: &[Issue]) -> BTreeSet<Key> {
    issues
        .iter()
        .map(|i| {
            let k = &i.dedupe_key;
            let u = |x: Option<StreamUsage>| x.map(|u| u.as_str().to_string()).unwrap_or_default();
            (
                k.tested_app.to_string(),
                u(k.usages.0),
                u(k.usages.1),
                k.kind.as_str().to_string(),
                k.subtype.as_ref().map(|s| s.label()),
            )
        })
        .collect()
}
