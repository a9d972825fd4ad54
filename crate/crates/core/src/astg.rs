//! Audio-stream-aware state transition graphs.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audio::AudioStatus;
use crate::ids::{AppId, ElementId};

/// A node: the window fingerprint together with the app's audio status.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Ass {
    pub window: String,
    pub status: AudioStatus,
}

impl std::fmt::Display for Ass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "<{}, {}>", self.window, self.status)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventDescriptor {
    Click {
        element: ElementId,
    },
    Input {
        element: ElementId,
        text: String,
    },
    /// Start another app on the same device and click it into playback.
    LaunchCollaborator {
        app: AppId,
        script: Vec<ElementId>,
    },
}

impl EventDescriptor {
    pub fn click(element: impl Into<ElementId>) -> Self {
        EventDescriptor::Click {
            element: element.into(),
        }
    }

    /// Element targeted by a GUI event, none for pseudo-events.
    pub fn element(&self) -> Option<&ElementId> {
        match self {
            EventDescriptor::Click { element } | EventDescriptor::Input { element, .. } => {
                Some(element)
            }
            EventDescriptor::LaunchCollaborator { .. } => None,
        }
    }
}

impl std::fmt::Display for EventDescriptor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EventDescriptor::Click { element } => write!(f, "click({element})"),
            EventDescriptor::Input { element, text } => write!(f, "input({element}, {text:?})"),
            EventDescriptor::LaunchCollaborator { app, .. } => write!(f, "launch({app})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Transition {
    pub from: Ass,
    pub event: EventDescriptor,
    pub to: Ass,
}

/// Verification result returned by a policy after each step.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Feedback {
    pub validity: bool,
    pub terminated: bool,
    #[serde(default)]
    pub suggestion: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("state {0} is not reachable from the initial state")]
    UnreachableState(Ass),
    #[error("transition endpoint {0} is not a state of the graph")]
    DanglingEndpoint(Ass),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Astg {
    pub app: AppId,
    pub initial: Ass,
    pub states: BTreeSet<Ass>,
    pub transitions: BTreeSet<Transition>,
}

impl Astg {
    pub fn new(app: AppId, initial: Ass) -> Self {
        Self {
            app,
            states: BTreeSet::from([initial.clone()]),
            initial,
            transitions: BTreeSet::new(),
        }
    }

    pub fn add(&mut self, from: Ass, event: EventDescriptor, to: Ass) {
        self.states.insert(from.clone());
        self.states.insert(to.clone());
        self.transitions.insert(Transition { from, event, to });
    }

    pub fn contains(&self, s: &Ass) -> bool {
        self.states.contains(s)
    }

    fn successors(&self) -> BTreeMap<&Ass, Vec<(&EventDescriptor, &Ass)>> {
        let mut out: BTreeMap<&Ass, Vec<(&EventDescriptor, &Ass)>> = BTreeMap::new();
        // transitions iterate sorted by (from, event, to)
        for t in &self.transitions {
            out.entry(&t.from).or_default().push((&t.event, &t.to));
        }
        out
    }

    /// Shortest event sequence from the initial state to `target`. Among
    /// equally short sequences the lexicographically smallest is returned.
    pub fn path_to(&self, target: &Ass) -> Result<Vec<EventDescriptor>, GraphError> {
        if !self.states.contains(target) {
            return Err(GraphError::UnreachableState(target.clone()));
        }
        let succ = self.successors();
        let mut parent: BTreeMap<&Ass, (&Ass, &EventDescriptor)> = BTreeMap::new();
        let mut seen = BTreeSet::from([&self.initial]);
        let mut queue = VecDeque::from([&self.initial]);
        while let Some(s) = queue.pop_front() {
            if s == target {
                let mut path = Vec::new();
                let mut cur = s;
                while let Some((prev, ev)) = parent.get(cur) {
                    path.push((*ev).clone());
                    cur = prev;
                }
                path.reverse();
                return Ok(path);
            }
            for (ev, to) in succ.get(s).into_iter().flatten() {
                if seen.insert(to) {
                    parent.insert(to, (s, ev));
                    queue.push_back(to);
                }
            }
        }
        Err(GraphError::UnreachableState(target.clone()))
    }

    /// States whose status is PLAY, DUCK or PAUSE_RESUME, in sorted order.
    pub fn play_like_states(&self) -> Vec<Ass> {
        self.states
            .iter()
            .filter(|s| s.status.is_play_like())
            .cloned()
            .collect()
    }

    pub fn states_with(&self, status: AudioStatus) -> Vec<Ass> {
        self.states
            .iter()
            .filter(|s| s.status == status)
            .cloned()
            .collect()
    }

    /// Endpoints belong to the state set and every state is reachable.
    pub fn validate(&self) -> Result<(), GraphError> {
        if !self.states.contains(&self.initial) {
            return Err(GraphError::DanglingEndpoint(self.initial.clone()));
        }
        for t in &self.transitions {
            for s in [&t.from, &t.to] {
                if !self.states.contains(s) {
                    return Err(GraphError::DanglingEndpoint(s.clone()));
                }
            }
        }
        let succ = self.successors();
        let mut seen = BTreeSet::from([&self.initial]);
        let mut stack = vec![&self.initial];
        while let Some(s) = stack.pop() {
            for (_, to) in succ.get(s).into_iter().flatten() {
                if seen.insert(to) {
                    stack.push(to);
                }
            }
        }
        match self.states.iter().find(|s| !seen.contains(s)) {
            Some(s) => Err(GraphError::UnreachableState(s.clone())),
            None => Ok(()),
        }
    }

    /// Compact text listing used in policy prompts.
    pub fn summary(&self) -> String {
        let mut out = format!(
            "{} states, {} transitions, initial {}\n",
            self.states.len(),
            self.transitions.len(),
            self.initial
        );
        for t in &self.transitions {
            let _ = writeln!(out, "{} --{}--> {}", t.from, t.event, t.to);
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graphs always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use AudioStatus::*;

    fn s(w: &str, st: AudioStatus) -> Ass {
        Ass {
            window: w.into(),
            status: st,
        }
    }

    fn two_state() -> Astg {
        let mut g = Astg::new(AppId::from("a"), s("w", Stop));
        g.add(s("w", Stop), EventDescriptor::click("play"), s("w", Play));
        g
    }

    #[test]
    fn trivial_paths() {
        let g = two_state();
        assert!(g.path_to(&g.initial).unwrap().is_empty());
        assert_eq!(
            g.path_to(&s("w", Play)).unwrap(),
            vec![EventDescriptor::click("play")]
        );
        assert_eq!(
            g.path_to(&s("x", Play)).unwrap_err(),
            GraphError::UnreachableState(s("x", Play))
        );
        g.validate().unwrap();
    }

    #[test]
    fn diamond_takes_smaller_label() {
        let mut g = Astg::new(AppId::from("a"), s("top", Stop));
        g.add(s("top", Stop), EventDescriptor::click("z"), s("left", Stop));
        g.add(s("top", Stop), EventDescriptor::click("b"), s("right", Stop));
        g.add(s("left", Stop), EventDescriptor::click("a"), s("bottom", Play));
        g.add(s("right", Stop), EventDescriptor::click("y"), s("bottom", Play));
        assert_eq!(
            g.path_to(&s("bottom", Play)).unwrap(),
            vec![EventDescriptor::click("b"), EventDescriptor::click("y")]
        );
    }

    #[test]
    fn play_like_listing() {
        let g = two_state();
        assert_eq!(g.play_like_states(), vec![s("w", Play)]);
        let empty = Astg::new(AppId::from("a"), s("w", Stop));
        assert!(empty.play_like_states().is_empty());
    }

    #[test]
    fn validation_catches_orphans() {
        let mut g = two_state();
        g.states.insert(s("island", Duck));
        assert_eq!(
            g.validate().unwrap_err(),
            GraphError::UnreachableState(s("island", Duck))
        );
        let mut g = two_state();
        g.states.remove(&s("w", Play));
        assert_eq!(
            g.validate().unwrap_err(),
            GraphError::DanglingEndpoint(s("w", Play))
        );
    }

    #[test]
    fn json_round_trip_is_stable() {
        let mut g = two_state();
        g.add(
            s("w", Play),
            EventDescriptor::LaunchCollaborator {
                app: AppId::from("rep"),
                script: vec![ElementId::from("go")],
            },
            s("w", Duck),
        );
        let text = g.to_json();
        let back = Astg::from_json(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.to_json(), text);
    }
}
