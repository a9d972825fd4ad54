//! Synthetic apps: a fixed 20-app corpus with injected hop faults, and a
//! random generator of fault-free specs.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::app::{Action, AppSpec, Category, ElementSpec, WindowSpec};
use crate::audio::{AudioStatus, ReactionTable, StreamUsage};
use crate::ids::{AppId, ElementId, WindowId};
use crate::superdevice::HopFault;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "fault", rename_all = "snake_case")]
pub enum InjectedFault {
    /// During hop-induced conflicts the app, as the earlier stream, takes
    /// `status` when a stream of `incoming` usage arrives.
    HopReaction {
        incoming: StreamUsage,
        status: AudioStatus,
    },
    /// Audio stays on the source device with this probability per hop.
    StuckSink { probability: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Injection {
    pub app: AppId,
    #[serde(flatten)]
    pub fault: InjectedFault,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticCorpus {
    pub apps: Vec<AppSpec>,
    pub injections: Vec<Injection>,
    /// Usage each app plays when it acts as a collaborator.
    pub primary_usage: BTreeMap<AppId, StreamUsage>,
}

impl SyntheticCorpus {
    pub fn injected_apps(&self) -> BTreeSet<AppId> {
        self.injections.iter().map(|i| i.app.clone()).collect()
    }

    pub fn clean_apps(&self) -> BTreeSet<AppId> {
        let dirty = self.injected_apps();
        self.apps
            .iter()
            .map(|a| a.id.clone())
            .filter(|id| !dirty.contains(id))
            .collect()
    }
}

fn element(id: String, description: &str, action: Action) -> ElementSpec {
    ElementSpec {
        id: ElementId::new(id),
        description: description.to_string(),
        action,
    }
}

fn spec(id: &str, category: Category, windows: Vec<WindowSpec>) -> AppSpec {
    let usages = windows
        .iter()
        .flat_map(|w| &w.elements)
        .filter_map(|e| match e.action {
            Action::Play(u) => Some(u),
            _ => None,
        })
        .collect();
    AppSpec {
        id: AppId::from(id),
        category,
        usages,
        initial_window: windows[0].id.clone(),
        reactions_normal: ReactionTable::default(),
        reactions_hopping: ReactionTable::default(),
        hop_fault: HopFault::default(),
        windows,
    }
}

/// Home window plays `first`; a second window plays `second`.
fn two_usage(id: &str, category: Category, first: StreamUsage, second: StreamUsage) -> AppSpec {
    let home = WindowSpec {
        id: WindowId::from("w0-home"),
        elements: vec![
            element(format!("{id}-play"), "Play the featured list", Action::Play(first)),
            element(format!("{id}-more"), "Open the video tab", Action::Navigate(WindowId::from("w1-more"))),
            element(format!("{id}-profile"), "Profile", Action::Inert),
        ],
    };
    let more = WindowSpec {
        id: WindowId::from("w1-more"),
        elements: vec![
            element(format!("{id}-clip"), "Play the top clip", Action::Play(second)),
            element(format!("{id}-back"), "Back", Action::Navigate(WindowId::from("w0-home"))),
        ],
    };
    spec(id, category, vec![home, more])
}

/// `gates` navigation windows in front of the one that plays `usage`.
fn gated(id: &str, category: Category, usage: StreamUsage, gates: usize) -> AppSpec {
    let mut windows = Vec::new();
    for g in 0..gates {
        let next = WindowId::new(format!("w{}-step", g + 1));
        windows.push(WindowSpec {
            id: WindowId::new(format!("w{g}-step")),
            elements: vec![
                element(format!("{id}-next{g}"), "Continue", Action::Navigate(next)),
                element(format!("{id}-help{g}"), "Help", Action::Inert),
            ],
        });
    }
    let last = windows.len();
    windows.push(WindowSpec {
        id: WindowId::new(format!("w{last}-step")),
        elements: vec![
            element(format!("{id}-start"), "Start playback", Action::Play(usage)),
            element(format!("{id}-stop"), "Stop playback", Action::Stop),
        ],
    });
    spec(id, category, windows)
}

/// The 20-app corpus: five apps per category, twelve with injected faults.
pub fn synthetic_corpus() -> SyntheticCorpus {
    use StreamUsage::*;
    let mut apps = Vec::new();
    for i in 1..=5 {
        apps.push(two_usage(&format!("m{i}"), Category::Music, Music, Movie));
    }
    for i in 1..=5 {
        apps.push(gated(&format!("v{i}"), Category::Video, Movie, 1));
    }
    for i in 1..=5 {
        apps.push(gated(&format!("n{i}"), Category::Navigation, Navig, 2));
    }
    // two social apps centred on short videos, three on calls
    for i in 1..=2 {
        apps.push(gated(&format!("s{i}"), Category::Social, Movie, 1));
    }
    for i in 3..=5 {
        apps.push(gated(&format!("s{i}"), Category::Social, Commu, 0));
    }

    let reaction = |incoming, status| InjectedFault::HopReaction { incoming, status };
    let stuck = |probability| InjectedFault::StuckSink { probability };
    let plan = [
        ("m1", reaction(Navig, AudioStatus::Play)),
        ("m2", reaction(Navig, AudioStatus::Stop)),
        ("m3", reaction(Music, AudioStatus::Play)),
        ("m4", stuck(1.0)),
        ("v1", stuck(1.0)),
        ("v2", stuck(0.5)),
        ("v3", reaction(Navig, AudioStatus::Play)),
        ("v4", reaction(Movie, AudioStatus::Play)),
        ("n1", reaction(Navig, AudioStatus::Play)),
        ("n2", stuck(1.0)),
        ("s1", reaction(Navig, AudioStatus::Stop)),
        ("s2", reaction(Navig, AudioStatus::Play)),
    ];
    let mut injections = Vec::new();
    for (id, fault) in plan {
        let app = apps.iter_mut().find(|a| a.id.as_str() == id).expect("planned app exists");
        match &fault {
            InjectedFault::HopReaction { incoming, status } => {
                app.reactions_hopping = app.reactions_hopping.clone().with_pre(*incoming, *status);
            }
            InjectedFault::StuckSink { probability } => {
                app.hop_fault = HopFault::stuck(*probability);
            }
        }
        injections.push(Injection {
            app: app.id.clone(),
            fault,
        });
    }

    let primary_usage = apps
        .iter()
        .map(|a| {
            let u = match a.category {
                Category::Music => Music,
                _ => *a.usages.iter().next().expect("every synthetic app plays"),
            };
            (a.id.clone(), u)
        })
        .collect();
    SyntheticCorpus {
        apps,
        injections,
        primary_usage,
    }
}

const STATUSES: [AudioStatus; 5] = AudioStatus::ALL;

fn random_reactions(rng: &mut impl Rng) -> ReactionTable {
    let mut t = ReactionTable::default();
    for _ in 0..rng.gen_range(0..=2) {
        let u = *StreamUsage::ALL.choose(rng).expect("non-empty");
        let s = *STATUSES.choose(rng).expect("non-empty");
        t = if rng.gen_bool(0.5) {
            t.with_pre(u, s)
        } else {
            t.with_post(u, s)
        };
    }
    t
}

/// A random valid spec with no hop fault and identical normal and hopping
/// reactions. Element ids are unique across the whole app.
pub fn random_fault_free_spec(rng: &mut impl Rng, id: &str) -> AppSpec {
    let category = *Category::ALL.choose(rng).expect("non-empty");
    let n_windows = rng.gen_range(1..=4);
    let pool_size = rng.gen_range(1..=2);
    let pool: Vec<StreamUsage> = StreamUsage::ALL
        .choose_multiple(rng, pool_size)
        .copied()
        .collect();
    let window_id = |i: usize| WindowId::new(format!("w{i}"));
    let mut windows = Vec::new();
    for w in 0..n_windows {
        let mut elements = Vec::new();
        for e in 0..rng.gen_range(1..=4) {
            let action = match rng.gen_range(0..10) {
                0..=3 => Action::Navigate(window_id(rng.gen_range(0..n_windows))),
                4..=6 => Action::Play(*pool.choose(rng).expect("non-empty")),
                7 => Action::Pause,
                8 => Action::Stop,
                _ => Action::Inert,
            };
            elements.push(element(format!("e{w}-{e}"), "Button", action));
        }
        windows.push(WindowSpec {
            id: window_id(w),
            elements,
        });
    }
    if !windows
        .iter()
        .flat_map(|w| &w.elements)
        .any(|e| matches!(e.action, Action::Play(_)))
    {
        windows[0].elements[0].action = Action::Play(pool[0]);
    }
    let mut s = spec(id, category, windows);
    s.reactions_normal = random_reactions(rng);
    s.reactions_hopping = s.reactions_normal.clone();
    s
}

/// `n` random fault-free apps `r0`, `r1`, ... drawn from `seed`.
pub fn random_corpus(n: usize, seed: u64) -> Vec<AppSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|i| random_fault_free_spec(&mut rng, &format!("r{i}"))).collect()
}
