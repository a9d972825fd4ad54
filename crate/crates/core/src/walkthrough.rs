//! The three-device hopping walkthrough used as a golden semantics demo.
//!
//! Starting from `sd1`, one hop produces `sd2`; the remaining three cases
//! each branch from `sd2`.

use std::fmt;

use crate::ids::{AppId, DeviceId};
use crate::scenario::{Scenario, ScenarioError};
use crate::superdevice::{Observation, Op, SuperDevice};

pub const WALKTHROUGH_SCENARIO: &str = include_str!("../scenarios/walkthrough.toml");

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub label: &'static str,
    pub from: &'static str,
    pub op: Op,
    pub before: Observation,
    pub after: Observation,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Walkthrough {
    pub initial: Observation,
    pub steps: Vec<Step>,
}

impl fmt::Display for Walkthrough {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "sd1: {}", self.initial)?;
        for s in &self.steps {
            writeln!(f, "{} on {}: {}", s.op, s.from, s.label)?;
            writeln!(f, "  -> {}", s.after)?;
        }
        Ok(())
    }
}

pub fn initial() -> Result<SuperDevice, ScenarioError> {
    Scenario::parse(WALKTHROUGH_SCENARIO)?.build()
}

fn hop(source: &str, app: &str, target: &str) -> Op {
    Op::StartHop {
        source: DeviceId::from(source),
        app: AppId::from(app),
        target: DeviceId::from(target),
    }
}

pub fn replay() -> Result<Walkthrough, ScenarioError> {
    let sd1 = initial()?;
    let mut sd2 = sd1.clone();
    let first = hop("d1", "a1", "d2");
    sd2.apply(&first)?;

    let mut steps = vec![Step {
        label: "hop a1 onto d2",
        from: "sd1",
        op: first,
        before: sd1.snapshot(),
        after: sd2.snapshot(),
    }];
    let branches = [
        ("end the hop", Op::EndHop),
        ("auto-end, then hop a4 onto d2", hop("d3", "a4", "d2")),
        ("auto-end, then hop a1 onto d3", hop("d1", "a1", "d3")),
    ];
    for (label, op) in branches {
        let mut sd = sd2.clone();
        sd.apply(&op)?;
        steps.push(Step {
            label,
            from: "sd2",
            op,
            before: sd2.snapshot(),
            after: sd.snapshot(),
        });
    }
    Ok(Walkthrough {
        initial: sd1.snapshot(),
        steps,
    })
}
